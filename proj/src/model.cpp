#include "xc1d/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "xc1d/ops.hpp"

namespace xc1d {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty() || value[0] == '-') {
    throw ConfigError("model config: bad integer for '" + key + "': '" +
                      value + "'");
  }
  return static_cast<std::size_t>(v);
}

// Input channels of middle block j.
std::size_t block_input_channels(const ModelConfig& c, std::size_t j) {
  return j == 0 ? c.entry.back().channels : c.block_channels;
}

bool has_shortcut_conv(const ModelConfig& c, std::size_t j) {
  return c.residual && block_input_channels(c, j) != c.block_channels;
}

struct ParamSpec {
  std::string name;
  Shape shape;
  enum class Init { kWeight, kZero, kOne } init;
  std::size_t fan_in = 1;
};

std::vector<ParamSpec> param_specs(const ModelConfig& c) {
  using Init = ParamSpec::Init;
  std::vector<ParamSpec> specs;
  std::size_t in_ch = 1;
  for (std::size_t i = 0; i < c.entry.size(); ++i) {
    const auto& st = c.entry[i];
    const std::string p = "entry." + std::to_string(i);
    specs.push_back({p + ".conv.weight", {st.channels, in_ch, st.kernel},
                     Init::kWeight, in_ch * st.kernel});
    specs.push_back({p + ".conv.bias", {st.channels}, Init::kZero});
    specs.push_back({p + ".norm.gamma", {st.channels}, Init::kOne});
    specs.push_back({p + ".norm.beta", {st.channels}, Init::kZero});
    in_ch = st.channels;
  }
  const std::size_t bc = c.block_channels;
  for (std::size_t j = 0; j < c.n_mod; ++j) {
    const std::string p = "block." + std::to_string(j);
    const std::size_t cin = block_input_channels(c, j);
    specs.push_back({p + ".sep1.depthwise", {cin, 1, c.block_kernel},
                     Init::kWeight, c.block_kernel});
    specs.push_back({p + ".sep1.pointwise", {bc, cin, 1}, Init::kWeight, cin});
    specs.push_back({p + ".sep1.bias", {bc}, Init::kZero});
    specs.push_back({p + ".norm1.gamma", {bc}, Init::kOne});
    specs.push_back({p + ".norm1.beta", {bc}, Init::kZero});
    specs.push_back({p + ".sep2.depthwise", {bc, 1, c.block_kernel},
                     Init::kWeight, c.block_kernel});
    specs.push_back({p + ".sep2.pointwise", {bc, bc, 1}, Init::kWeight, bc});
    specs.push_back({p + ".sep2.bias", {bc}, Init::kZero});
    specs.push_back({p + ".norm2.gamma", {bc}, Init::kOne});
    specs.push_back({p + ".norm2.beta", {bc}, Init::kZero});
    if (has_shortcut_conv(c, j)) {
      specs.push_back({p + ".shortcut.weight", {bc, cin, 1}, Init::kWeight, cin});
      specs.push_back({p + ".shortcut.bias", {bc}, Init::kZero});
    }
  }
  specs.push_back({"head.dense.weight", {bc, c.n_classes}, Init::kWeight, bc});
  specs.push_back({"head.dense.bias", {c.n_classes}, Init::kZero});
  return specs;
}

template <typename T>
Tensor<T> norm(const ModelParams<T>& params, const std::string& prefix,
               const Tensor<T>& x) {
  return layers::instance_norm1d(
      x, InstanceNorm1dParams<T>{params.at(prefix + ".gamma"),
                                 params.at(prefix + ".beta")});
}

template <typename T>
Tensor<T> sep(const ModelParams<T>& params, const std::string& prefix,
              const Tensor<T>& x) {
  return layers::separable_conv1d(
      x, SeparableConv1dParams<T>{params.at(prefix + ".depthwise"),
                                  params.at(prefix + ".pointwise"),
                                  params.at(prefix + ".bias")});
}

}  // namespace

void ModelConfig::validate() const {
  std::vector<std::string> problems;
  if (n_classes < 2) problems.push_back("n_classes must be >= 2");
  if (input_length == 0) problems.push_back("input_length must be >= 1");
  if (entry.empty()) problems.push_back("entry module needs at least one stage");
  for (std::size_t i = 0; i < entry.size(); ++i) {
    const auto& s = entry[i];
    const std::string at = "entry[" + std::to_string(i) + "]";
    if (s.channels == 0) problems.push_back(at + ".channels must be >= 1");
    if (s.stride == 0) problems.push_back(at + ".stride must be >= 1");
    if (s.kernel % 2 == 0) problems.push_back(at + ".kernel must be odd");
  }
  if (n_mod < 1) problems.push_back("n_mod must be >= 1");
  if (block_channels == 0) problems.push_back("block_channels must be >= 1");
  if (block_kernel % 2 == 0) problems.push_back("block_kernel must be odd");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    problems.push_back("dropout must be in [0, 1)");
  }
  if (problems.empty()) return;
  std::string msg = "invalid model config:";
  for (const auto& p : problems) msg += " " + p + ";";
  msg.pop_back();
  throw ConfigError(msg);
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "n_classes=" << n_classes << '\n';
  os << "input_length=" << input_length << '\n';
  os << "entry=";
  for (std::size_t i = 0; i < entry.size(); ++i) {
    if (i) os << ',';
    os << entry[i].channels << ':' << entry[i].stride << ':' << entry[i].kernel;
  }
  os << '\n';
  os << "n_mod=" << n_mod << '\n';
  os << "block_channels=" << block_channels << '\n';
  os << "block_kernel=" << block_kernel << '\n';
  os << "dropout=" << format_double(dropout) << '\n';
  os << "residual=" << (residual ? 1 : 0) << '\n';
  return os.str();
}

ModelConfig ModelConfig::parse(const std::string& text) {
  ModelConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("model config: expected key=value, got '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "n_classes") {
      c.n_classes = parse_size(key, value);
    } else if (key == "input_length") {
      c.input_length = parse_size(key, value);
    } else if (key == "entry") {
      c.entry.clear();
      std::istringstream stages(value);
      std::string stage;
      while (std::getline(stages, stage, ',')) {
        const auto a = stage.find(':');
        const auto b = stage.find(':', a == std::string::npos ? a : a + 1);
        if (a == std::string::npos || b == std::string::npos) {
          throw ConfigError("model config: entry stage must be "
                            "channels:stride:kernel, got '" + stage + "'");
        }
        c.entry.push_back({parse_size(key, stage.substr(0, a)),
                           parse_size(key, stage.substr(a + 1, b - a - 1)),
                           parse_size(key, stage.substr(b + 1))});
      }
    } else if (key == "n_mod") {
      c.n_mod = parse_size(key, value);
    } else if (key == "block_channels") {
      c.block_channels = parse_size(key, value);
    } else if (key == "block_kernel") {
      c.block_kernel = parse_size(key, value);
    } else if (key == "dropout") {
      try {
        std::size_t used = 0;
        c.dropout = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ConfigError("model config: bad number for 'dropout': '" + value +
                          "'");
      }
    } else if (key == "residual") {
      if (value != "0" && value != "1") {
        throw ConfigError("model config: residual must be 0 or 1");
      }
      c.residual = value == "1";
    } else {
      throw ConfigError("model config: unknown key '" + key + "'");
    }
  }
  return c;
}

template <typename T>
void ModelParams<T>::add(std::string name, Tensor<T> value) {
  if (index_.count(name)) {
    throw ConfigError("model params: duplicate parameter '" + name + "'");
  }
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value)});
}

template <typename T>
std::size_t ModelParams<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.value.numel();
  return n;
}

template <typename T>
const Tensor<T>& ModelParams<T>::at(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    throw ConfigError("model params: no parameter named '" + name + "'");
  }
  return entries_[it->second].value;
}

template <typename T>
Tensor<T>& ModelParams<T>::at(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    throw ConfigError("model params: no parameter named '" + name + "'");
  }
  return entries_[it->second].value;
}

template <typename T>
void ModelParams<T>::zero_grad() {
  for (auto& p : entries_) p.value.zero_grad();
}

template <typename T>
ModelParams<T> ModelParams<T>::clone() const {
  ModelParams out;
  for (const auto& p : entries_) out.add(p.name, p.value.clone());
  return out;
}

std::vector<LayerCount> param_breakdown(const ModelConfig& config) {
  config.validate();
  std::vector<LayerCount> out;
  for (const auto& s : param_specs(config)) {
    out.push_back({s.name, shape_numel(s.shape)});
  }
  return out;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t n = 0;
  for (const auto& l : param_breakdown(config)) n += l.count;
  return n;
}

template <typename T>
ModelParams<T> build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, 0x1A17));
  ModelParams<T> params;
  for (auto& spec : param_specs(config)) {
    const std::size_t n = shape_numel(spec.shape);
    std::vector<T> values(n);
    switch (spec.init) {
      case ParamSpec::Init::kZero:
        break;
      case ParamSpec::Init::kOne:
        std::fill(values.begin(), values.end(), T(1));
        break;
      case ParamSpec::Init::kWeight: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
        for (auto& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
        break;
      }
    }
    params.add(std::move(spec.name),
               Tensor<T>(std::move(spec.shape), std::move(values), true));
  }
  return params;
}

template <typename T>
Tensor<T> forward(const ModelParams<T>& params, const ModelConfig& config,
                  const Tensor<T>& x, Mode mode, Rng& rng,
                  std::vector<Tensor<T>>* relu_inputs) {
  auto relu = [relu_inputs](const Tensor<T>& t) {
    if (relu_inputs) relu_inputs->push_back(t);
    return ops::relu(t);
  };
  if (x.rank() != 3 || x.dim(1) != 1 || x.dim(2) != config.input_length) {
    throw ShapeError("forward: expected input [batch, 1, " +
                     std::to_string(config.input_length) + "], got " +
                     shape_to_string(x.shape()));
  }
  Tensor<T> h = x;
  for (std::size_t i = 0; i < config.entry.size(); ++i) {
    const std::string p = "entry." + std::to_string(i);
    h = layers::conv1d(h, Conv1dParams<T>{params.at(p + ".conv.weight"),
                                          params.at(p + ".conv.bias"),
                                          config.entry[i].stride});
    h = relu(norm(params, p + ".norm", h));
  }
  for (std::size_t j = 0; j < config.n_mod; ++j) {
    const std::string p = "block." + std::to_string(j);
    Tensor<T> y = sep(params, p + ".sep1", relu(h));
    y = norm(params, p + ".norm1", y);
    y = sep(params, p + ".sep2", relu(y));
    y = norm(params, p + ".norm2", y);
    if (config.residual) {
      Tensor<T> shortcut = h;
      if (has_shortcut_conv(config, j)) {
        shortcut = layers::conv1d(
            h, Conv1dParams<T>{params.at(p + ".shortcut.weight"),
                               params.at(p + ".shortcut.bias"), 1});
      }
      y = ops::add(y, shortcut);
    }
    h = y;
  }
  h = layers::global_avg_pool1d(relu(h));
  h = layers::dropout(h, config.dropout, mode, rng);
  return layers::dense(h, params.at("head.dense.weight"),
                       params.at("head.dense.bias"));
}

template class ModelParams<float>;
template class ModelParams<double>;
template ModelParams<float> build_model<float>(const ModelConfig&, std::uint64_t);
template ModelParams<double> build_model<double>(const ModelConfig&,
                                                 std::uint64_t);
template Tensor<float> forward(const ModelParams<float>&, const ModelConfig&,
                               const Tensor<float>&, Mode, Rng&,
                               std::vector<Tensor<float>>*);
template Tensor<double> forward(const ModelParams<double>&, const ModelConfig&,
                                const Tensor<double>&, Mode, Rng&,
                                std::vector<Tensor<double>>*);

}  // namespace xc1d
