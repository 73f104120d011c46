#include <gtest/gtest.h>

#include <cmath>

#include "xc1d/ops.hpp"
#include "xc1d/rng.hpp"
#include "xc1d/tensor.hpp"

using namespace xc1d;

namespace {

Tensor<double> vec(std::vector<double> v, bool grad = false) {
  const std::size_t n = v.size();
  return Tensor<double>({n}, std::move(v), grad);
}

Tensor<double> random_tensor(Shape shape, Rng& rng, double margin = 0.0) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) {
    do {
      x = rng.uniform(-2, 2);
    } while (std::abs(x) < margin);
  }
  return Tensor<double>(std::move(shape), std::move(v), true);
}

std::vector<double> values(const Tensor<double>& t) { return {t.data().begin(), t.data().end()}; }
std::vector<double> grads(const Tensor<double>& t) { return {t.grad().begin(), t.grad().end()}; }

}  // namespace

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor<float>({2, 0}, {}), ShapeError);
  EXPECT_THROW(Tensor<float>({2, 2}, {1, 2, 3}), ShapeError);
}

TEST(Tensor, ForwardExamples) {
  EXPECT_EQ(values(ops::add(vec({1, 2}), vec({3, 4}))), (std::vector<double>{4, 6}));
  EXPECT_EQ(values(ops::relu(vec({-1, 0, 2}))), (std::vector<double>{0, 0, 2}));
  EXPECT_EQ(ops::reduce_mean(vec({1, 2, 3})).item(), 2.0);
}

TEST(Tensor, ShapeMismatchNamesOpAndShapes) {
  try {
    ops::add(vec({1, 2}), vec({1, 2, 3}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("add"), std::string::npos);
    EXPECT_NE(msg.find("[2]"), std::string::npos);
    EXPECT_NE(msg.find("[3]"), std::string::npos);
  }
}

TEST(Autodiff, BackwardExamples) {
  auto x = vec({1, 2, 3}, true);
  ops::reduce_sum(x).backward();
  EXPECT_EQ(grads(x), (std::vector<double>{1, 1, 1}));

  auto y = vec({1, 2}, true);
  ops::reduce_sum(ops::mul(y, y)).backward();
  EXPECT_EQ(grads(y), (std::vector<double>{2, 4}));

  auto z = vec({-1, 2}, true);
  ops::reduce_sum(ops::relu(z)).backward();
  EXPECT_EQ(grads(z), (std::vector<double>{0, 1}));
}

TEST(Autodiff, FanOutAccumulates) {
  auto x = vec({1, 5, -3}, true);
  ops::reduce_sum(ops::add(x, x)).backward();
  EXPECT_EQ(grads(x), (std::vector<double>{2, 2, 2}));
}

TEST(Autodiff, LeafGradAccumulatesAcrossCalls) {
  auto x = vec({1, 2}, true);
  ops::reduce_sum(x).backward();
  ops::reduce_sum(x).backward();
  EXPECT_EQ(grads(x), (std::vector<double>{2, 2}));
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

TEST(Autodiff, RejectsNonScalarAndConsumedRoots) {
  auto x = vec({1, 2}, true);
  EXPECT_THROW(ops::relu(x).backward(), GraphError);
  auto loss = ops::reduce_sum(ops::mul(x, x));
  loss.backward();
  EXPECT_THROW(loss.backward(), GraphError);
}

TEST(Autodiff, GraphIsTopological) {
  auto x = vec({1, 2}, true);
  auto y = ops::exp(x);
  auto root = ops::reduce_sum(ops::add(ops::mul(y, x), y));
  Graph<double> g(root);
  const auto& nodes = g.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& in : nodes[i]->inputs) {
      if (!in->requires_grad) continue;
      const auto pos = std::find(nodes.begin(), nodes.end(), in) - nodes.begin();
      EXPECT_LT(static_cast<std::size_t>(pos), i);
    }
  }
  EXPECT_EQ(nodes.back(), root.node());
}

TEST(Autodiff, NoGraphWithoutRequiresGrad) {
  auto y = ops::mul(vec({1, 2}), vec({3, 4}));
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node()->inputs.empty());
}

TEST(GradCheck, ClosedFormExamples) {
  EXPECT_LT(grad_check([](const Tensor<double>& x) { return ops::reduce_sum(ops::mul(x, x)); },
                       vec({1, 2, 3}, true)),
            1e-6);
  Rng rng(3);
  EXPECT_LT(grad_check([](const Tensor<double>& x) { return ops::reduce_sum(x); },
                       random_tensor({7}, rng)),
            1e-10);
}

// Every primitive against central differences, 100 seeds each.
TEST(GradCheck, EveryPrimitive) {
  using F = ScalarFn;
  struct Case {
    const char* name;
    std::function<F(Rng&)> make;
    Shape shape;
    double margin;
  };
  const std::vector<Case> cases = {
      {"add", [](Rng& r) -> F {
         auto b = random_tensor({3, 4}, r);
         return [b](const Tensor<double>& x) { return ops::reduce_sum(ops::add(x, b)); };
       }, {3, 4}, 0},
      {"sub", [](Rng& r) -> F {
         auto b = random_tensor({3, 4}, r);
         return [b](const Tensor<double>& x) {
           return ops::reduce_sum(ops::mul(ops::sub(b, x), ops::sub(b, x)));
         };
       }, {3, 4}, 0},
      {"mul", [](Rng& r) -> F {
         auto b = random_tensor({3, 4}, r);
         return [b](const Tensor<double>& x) { return ops::reduce_sum(ops::mul(ops::mul(x, b), x)); };
       }, {3, 4}, 0},
      {"matmul", [](Rng& r) -> F {
         auto b = random_tensor({4, 2}, r);
         return [b](const Tensor<double>& x) {
           auto y = ops::matmul(x, b);
           return ops::reduce_sum(ops::mul(y, y));
         };
       }, {3, 4}, 0},
      {"reduce_mean_axis", [](Rng&) -> F {
         return [](const Tensor<double>& x) {
           auto m = ops::reduce_mean(x, 1);
           return ops::reduce_sum(ops::mul(m, m));
         };
       }, {2, 5, 3}, 0},
      {"reduce_var", [](Rng&) -> F {
         return [](const Tensor<double>& x) {
           auto v = ops::reduce_var(x, 2);
           return ops::reduce_sum(ops::mul(v, v));
         };
       }, {2, 3, 6}, 0},
      {"broadcast", [](Rng& r) -> F {
         auto w = random_tensor({2, 3, 4}, r);
         return [w](const Tensor<double>& x) {
           return ops::reduce_sum(ops::mul(ops::broadcast_to(x, {2, 3, 4}), w));
         };
       }, {3, 1}, 0},
      {"slice", [](Rng&) -> F {
         return [](const Tensor<double>& x) {
           auto s = ops::slice(x, 1, 1, 3);
           return ops::reduce_sum(ops::mul(s, s));
         };
       }, {2, 5}, 0},
      {"pad", [](Rng& r) -> F {
         auto w = random_tensor({2, 8}, r);
         return [w](const Tensor<double>& x) {
           return ops::reduce_sum(ops::mul(ops::pad(x, 1, 2, 1), w));
         };
       }, {2, 5}, 0},
      {"concat", [](Rng& r) -> F {
         auto b = random_tensor({2, 2}, r);
         auto w = random_tensor({2, 5}, r);
         return [b, w](const Tensor<double>& x) {
           return ops::reduce_sum(ops::mul(ops::concat<double>({x, b}, 1), w));
         };
       }, {2, 3}, 0},
      {"relu", [](Rng& r) -> F {
         auto w = random_tensor({10}, r);
         return [w](const Tensor<double>& x) { return ops::reduce_sum(ops::mul(ops::relu(x), w)); };
       }, {10}, 0.01},
      {"exp", [](Rng&) -> F {
         return [](const Tensor<double>& x) { return ops::reduce_sum(ops::exp(x)); };
       }, {6}, 0},
      {"log", [](Rng&) -> F {
         return [](const Tensor<double>& x) {
           return ops::reduce_sum(ops::log(ops::mul(x, x)));
         };
       }, {6}, 0.2},
      {"reshape_scale", [](Rng&) -> F {
         return [](const Tensor<double>& x) {
           auto y = ops::scale(ops::reshape(x, {6}), 3.0);
           return ops::reduce_mean(ops::mul(y, y));
         };
       }, {2, 3}, 0},
  };
  for (const auto& c : cases) {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      auto f = c.make(rng);
      worst = std::max(worst, grad_check(f, random_tensor(c.shape, rng, c.margin)));
    }
    EXPECT_LT(worst, 1e-4) << c.name;
  }
}

TEST(Tensor, ForwardIsDeterministic) {
  Rng r1(5), r2(5);
  auto a = random_tensor({4, 4}, r1), b = random_tensor({4, 4}, r2);
  EXPECT_EQ(values(ops::exp(ops::matmul(a, a))), values(ops::exp(ops::matmul(b, b))));
}
