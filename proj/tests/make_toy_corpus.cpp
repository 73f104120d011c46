// Writes a small synthetic corpus in the Speech Commands layout.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "support/toy.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a toy keyword corpus"};
  std::string out;
  xc1d::toy::ToyCorpusSpec spec;
  app.add_option("out", out, "Output directory")->required();
  app.add_option("--speakers", spec.speakers, "Speakers per word")->capture_default_str();
  app.add_option("--clips", spec.clips_per_speaker, "Clips per speaker")->capture_default_str();
  app.add_option("--seed", spec.seed, "Seed")->capture_default_str();
  std::string model_config;
  app.add_option("--model-config", model_config,
                 "Also write the small test architecture as key=value lines here");
  CLI11_PARSE(app, argc, argv);
  if (!model_config.empty()) {
    std::ofstream(model_config) << xc1d::toy::toy_config(2).to_text();
  }
  std::cout << xc1d::toy::write_toy_corpus(out, spec) << " files\n";
  return 0;
}
