// Command-line entry point.

#include <iostream>

#include <CLI11.hpp>

#include "iotids/pipeline.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"IoT flow intrusion detection: synthesize data, train, evaluate, predict, rank features"};
  app.require_subcommand(1);

  std::string spec, out, config, data, model, report, input, output;
  std::size_t repeats = 5;
  std::uint64_t seed = 7;

  auto* synth = app.add_subcommand("synth", "write a synthetic labeled conn log");
  synth->add_option("--spec", spec, "synthetic data spec (JSON)")->required();
  synth->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train the configured models");
  train->add_option("--config", config, "experiment config (JSON)")->required();
  train->add_option("--data", data, "log file or directory")->required();
  train->add_option("--out", out, "run directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score a trained model on labeled logs");
  evaluate->add_option("--model", model, "RUN_DIR/<model>")->required();
  evaluate->add_option("--data", data, "log file or directory")->required();
  evaluate->add_option("--report", report, "metrics JSON path")->required();

  auto* predict = app.add_subcommand("predict", "label flows with a trained model");
  predict->add_option("--model", model, "RUN_DIR/<model>")->required();
  predict->add_option("--input", input, "log file")->required();
  predict->add_option("--output", output, "predictions CSV")->required();

  auto* importance = app.add_subcommand("importance", "permutation feature importance");
  importance->add_option("--model", model, "RUN_DIR/<model>")->required();
  importance->add_option("--data", data, "log file or directory")->required();
  importance->add_option("--repeats", repeats, "shuffles per feature")->default_val(5);
  importance->add_option("--seed", seed, "shuffle seed")->default_val(7);
  importance->add_option("--out", out, "importance CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      iotids::cmd_synth(spec, out);
    } else if (*train) {
      const auto outcome = iotids::cmd_train(iotids::load_config(config), data, out);
      iotids::log::info("manifest " + outcome.manifest.string());
    } else if (*evaluate) {
      const auto r = iotids::cmd_evaluate(model, data, report);
      iotids::log::info("accuracy " + iotids::format_number(r.metrics.accuracy));
    } else if (*predict) {
      const auto n = iotids::cmd_predict(model, input, output);
      iotids::log::info("predicted " + std::to_string(n) + " rows");
    } else if (*importance) {
      iotids::cmd_importance(model, data, repeats, seed, out);
    }
  } catch (const iotids::Error& e) {
    iotids::log::error(e.what());
    return iotids::exit_code_for(e.kind());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    iotids::log::error(e.what());
    return 4;
  }
}
