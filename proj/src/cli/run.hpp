#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cli/artifacts.hpp"
#include "cli/config.hpp"

namespace crackfreq::cli {

enum class Mode { solve, frequency, spectrum, blowup, validate };

struct RunResult {
  nlohmann::ordered_json manifest;
  std::vector<Check> checks;
  bool all_pass() const;
};

/// Failure of one stage; carries the library error code.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, std::string code, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)), code_(std::move(code)) {}
  const std::string& stage() const { return stage_; }
  const std::string& code() const { return code_; }

 private:
  std::string stage_;
  std::string code_;
};

/// Runs the stages of `mode` for the configured scenario and commits the
/// output directory. Nothing is left on disk if a stage throws.
RunResult run(const RunConfig& cfg, Mode mode);

/// Per-metric relative differences between two completed runs. Throws
/// ScenarioMismatch when the scenarios differ.
nlohmann::ordered_json compare(const std::string& run_a, const std::string& run_b);

/// Machine-readable error record.
std::string error_record(const std::string& code, const std::string& message, const std::string& stage);

}  // namespace crackfreq::cli
