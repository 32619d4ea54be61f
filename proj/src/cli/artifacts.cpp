#include "cli/artifacts.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "crackfreq/errors.hpp"

namespace fs = std::filesystem;

namespace crackfreq::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("DigestError", "sha256 failed");
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IOError", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

StagedOutput::StagedOutput(fs::path target) : target_(std::move(target)) {
  std::random_device rd;
  char suffix[24];
  std::snprintf(suffix, sizeof suffix, ".staging-%08x", rd());
  staging_ = target_;
  staging_ += suffix;
  fs::create_directories(staging_);
}

StagedOutput::~StagedOutput() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedOutput::write(const std::string& relative, const std::string& content) {
  const fs::path path = staging_ / relative;
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IOError", "cannot write " + path.string());
  out << content;
  if (!out) throw Error("IOError", "short write to " + path.string());
  files_.push_back({relative, sha256_hex(content), content.size()});
}

void StagedOutput::commit() {
  if (fs::exists(target_)) {
    fs::path old = target_;
    old += ".previous";
    fs::remove_all(old);
    fs::rename(target_, old);
    fs::rename(staging_, target_);
    fs::remove_all(old);
  } else {
    if (target_.has_parent_path()) fs::create_directories(target_.parent_path());
    fs::rename(staging_, target_);
  }
  committed_ = true;
}

void StageTimer::start(const std::string& name) {
  current_ = name;
  begin_ = std::chrono::steady_clock::now();
}

void StageTimer::stop() {
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
  stages_.emplace_back(current_, s);
  current_.clear();
}

nlohmann::ordered_json StageTimer::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [name, s] : stages_) arr.push_back({{"stage", name}, {"seconds", s}});
  return arr;
}

}  // namespace crackfreq::cli
