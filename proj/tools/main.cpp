#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "matmcmc/experiments.hpp"

namespace {

int threads_from_env() {
  const char* env = std::getenv("MATMCMC_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matmcmc: MCMC kernels and experiments on matrix spaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = threads_from_env();
  long long seed_override = -1;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads");
  run->add_option("--seed", seed_override, "override the config seed");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", validate_path, "JSON experiment config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      matmcmc::run_config_file(config_path, out_dir, threads, seed_override);
      return 0;
    }
    std::cout << matmcmc::validate_config_file(validate_path) << "\n";
    return 0;
  } catch (const matmcmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
