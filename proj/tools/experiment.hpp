#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "calderon/report.hpp"

namespace calderon::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInvalid = 2;

/// Invalid configuration; `field` is the dotted path of the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string subcommand;
  /// Defaults merged with the file, validated.
  Json params;
  std::optional<std::uint64_t> seed;
  double resolution_scale = 1.0;
  std::string out_dir = ".";

  /// Canonical JSON of everything that affects results (not out_dir).
  Json canonical() const;
  std::string hash() const;
};

const std::vector<std::string>& subcommands();
/// Whether the subcommand draws random samples (and so needs a seed).
bool randomized(const std::string& subcommand);
Json default_params(const std::string& subcommand);

/// `file` is the parsed config (null for none). Keys: optional "subcommand", "seed",
/// "resolution_scale"; everything else overrides a default parameter. Command-line
/// seed and scale win over the file. Throws ConfigError.
ExperimentConfig make_config(const std::string& subcommand, const Json& file, std::optional<std::uint64_t> seed,
                             std::optional<double> resolution_scale, std::string out_dir);

struct Outcome {
  Json results;
  /// (name, pass) for every asserted property.
  std::vector<std::pair<std::string, bool>> checks;
  /// Plot data: (file name, CSV text).
  std::vector<std::pair<std::string, std::string>> files;

  bool pass() const;
};

Outcome run(const ExperimentConfig& config);

/// Report without the metadata field; byte-identical for identical configs.
Json report_json(const ExperimentConfig& config, const Outcome& outcome);

/// Runs, writes <out>/<subcommand>.json and the CSV files, returns the exit status.
int execute(const ExperimentConfig& config);

int main_entry(int argc, char** argv);

}  // namespace calderon::cli
