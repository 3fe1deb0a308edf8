#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dqm/common.hpp"

namespace dqm::csv {

/// Splits one CSV line on commas, trimming whitespace. No quoting support;
/// none of the shipped schemas need it.
std::vector<std::string> split(const std::string& line);

/// Reads a CSV file into rows of fields. Skips blank lines and lines whose
/// first non-space character is '#'.
std::vector<std::vector<std::string>> read_file(const std::string& path);

double to_double(const std::string& s, const std::string& context);
int to_int(const std::string& s, const std::string& context);

/// Formats a double with enough digits to round-trip, stable across runs.
std::string fmt(double v);

/// Line-oriented CSV writer with deterministic formatting.
class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();
  void row(const std::vector<std::string>& fields);
  void raw(const std::string& line);
  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

}  // namespace dqm::csv
