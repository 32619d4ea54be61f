#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace crackfreq::cli {

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);
std::string format_double(double v);

struct FileRecord {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Output directory that only appears once the run has succeeded. Files are
/// written into a sibling staging directory, which `commit` renames into
/// place; the destructor removes it otherwise.
class StagedOutput {
 public:
  explicit StagedOutput(std::filesystem::path target);
  ~StagedOutput();
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;

  void write(const std::string& relative, const std::string& content);
  const std::vector<FileRecord>& files() const { return files_; }
  const std::filesystem::path& staging() const { return staging_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  std::vector<FileRecord> files_;
  bool committed_ = false;
};

class StageTimer {
 public:
  void start(const std::string& name);
  void stop();
  nlohmann::ordered_json to_json() const;

 private:
  std::string current_;
  std::chrono::steady_clock::time_point begin_;
  std::vector<std::pair<std::string, double>> stages_;
};

}  // namespace crackfreq::cli
