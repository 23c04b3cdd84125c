#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "amava/metrics.hpp"
#include "amava/model_io.hpp"
#include "amava/net/config.hpp"
#include "amava/net/server.hpp"
#include "amava/synthetic.hpp"
#include "amava/training.hpp"

namespace {

int run_serve(const std::string& path) {
  amava::net::ServerConfig cfg;
  try {
    cfg = amava::net::load_config(path);
    // open files and check keys before binding anything
    (void)amava::net::Components::from_config(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "amava: invalid configuration: %s\n", e.what());
    return 2;
  }
  try {
    return amava::net::serve(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "amava: %s\n", e.what());
    return 1;
  }
}

int run_check(const std::string& path) {
  try {
    const auto cfg = amava::net::load_config(path);
    (void)amava::net::Components::from_config(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "amava: invalid configuration: %s\n", e.what());
    return 2;
  }
  std::puts("configuration ok");
  return 0;
}

int run_train(const std::string& data, const std::string& out, const amava::TrainConfig& cfg) {
  const auto rows = amava::read_dataset_csv(data);
  const auto result = amava::train(rows, cfg);
  amava::save_model(result.params, result.scaler, out);
  const auto& r = result.report;
  std::printf("rows train/val/test: %zu/%zu/%zu\n", r.train_rows, r.validation_rows, r.test_rows);
  std::printf("epochs run: %zu, best epoch: %d, best validation loss: %.6f\n", r.epochs.size(), r.best_epoch,
              r.best_validation_loss);
  std::printf("test accuracy: %.4f\n", r.test_accuracy);
  std::printf("model written to %s\n", out.c_str());
  return 0;
}

int run_analyze(const std::string& log, const std::string& out) {
  const auto report = amava::analyze_file(log);
  if (!out.empty()) amava::export_csv(report, out);
  std::cout << amava::to_csv(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amava: live video to audio feedback server and tools"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "run the WebSocket server");
  serve->add_option("--config", config_path, "INI configuration file")->required();

  auto* check = app.add_subcommand("check-config", "validate a configuration file and exit");
  check->add_option("--config", config_path, "INI configuration file")->required();

  app.add_subcommand("example-config", "print a configuration with every key at its default");

  std::string data, model_out;
  amava::TrainConfig tcfg;
  tcfg.seed = 7;
  auto* train = app.add_subcommand("train", "train the motion classifier from a feature CSV");
  train->add_option("--data", data, "CSV with frame_diff,flow_mag,label")->required()->check(CLI::ExistingFile);
  train->add_option("--out", model_out, "model file to write")->required();
  train->add_option("--seed", tcfg.seed, "split, init and shuffle seed")->capture_default_str();
  train->add_option("--lr", tcfg.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--wd", tcfg.weight_decay, "L2 weight decay")->capture_default_str();
  train->add_option("--batch", tcfg.batch_size, "mini-batch size")->capture_default_str();
  train->add_option("--patience", tcfg.patience, "early stopping patience")->capture_default_str();
  train->add_option("--max-epochs", tcfg.max_epochs, "epoch limit")->capture_default_str();

  std::string corpus_out;
  std::size_t rows_per_class = 200;
  std::uint64_t corpus_seed = 1;
  auto* corpus = app.add_subcommand("make-corpus", "write a synthetic labeled feature CSV");
  corpus->add_option("--out", corpus_out, "CSV path")->required();
  corpus->add_option("--rows-per-class", rows_per_class, "rows per movement class")->capture_default_str();
  corpus->add_option("--seed", corpus_seed, "generator seed")->capture_default_str();

  std::string log_path, report_out;
  auto* analyze = app.add_subcommand("analyze", "summarize an NDJSON event log");
  analyze->add_option("--log", log_path, "NDJSON event log")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", report_out, "CSV report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(config_path);
    if (*check) return run_check(config_path);
    if (app.got_subcommand("example-config")) {
      std::cout << amava::net::example_config();
      return 0;
    }
    if (*train) return run_train(data, model_out, tcfg);
    if (*corpus) {
      amava::write_dataset_csv(corpus_out, amava::synthetic::separable_dataset(rows_per_class, corpus_seed));
      std::printf("wrote %zu rows to %s\n", rows_per_class * 3, corpus_out.c_str());
      return 0;
    }
    if (*analyze) return run_analyze(log_path, report_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "amava: %s\n", e.what());
    return 1;
  }
  return 0;
}
