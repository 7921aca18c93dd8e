#pragma once

#include <stdexcept>
#include <string>

namespace shrinkreg {

// Invalid configuration, invalid parameter, or inconsistent dimensions.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed data file. line() is 1-based; 0 when unknown.
class DataFormatError : public std::runtime_error {
 public:
  DataFormatError(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Numerically rank-deficient design. block() names the first dependent
// column block ("x" or "w") when it could be identified.
class RankError : public std::runtime_error {
 public:
  explicit RankError(const std::string& msg, std::string block = "")
      : std::runtime_error(msg), block_(std::move(block)) {}
  const std::string& block() const { return block_; }

 private:
  std::string block_;
};

}  // namespace shrinkreg
