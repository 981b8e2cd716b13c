#ifndef MATMCMC_EXPERIMENTS_HPP
#define MATMCMC_EXPERIMENTS_HPP

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace matmcmc {

inline constexpr const char* kVersion = "matmcmc 0.1.0";

// Configuration problem: wrong/missing fields, bad dimensions. The CLI maps
// this to exit code 2 (numerical failures map to 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses and cross-checks a config without running it; returns "ok" or
// throws ConfigError.
std::string validate_config_file(const std::string& path);

// Executes the experiment named in the config, writing outputs and a
// manifest under out_dir. seed_override, when nonnegative, replaces the
// config seed.
void run_config_file(const std::string& path, const std::string& out_dir,
                     int threads, long long seed_override = -1);

// In-memory variants used by tests.
std::string validate_config(const nlohmann::json& config);
void run_config(const nlohmann::json& config, const std::string& out_dir, int threads);

}  // namespace matmcmc

#endif
