#include "dqm/csv.hpp"

#include <cstdlib>

namespace dqm::csv {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::vector<std::vector<std::string>> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(split(t));
  }
  return rows;
}

double to_double(const std::string& s, const std::string& context) {
  if (s.empty()) throw ValidationError(context + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw ValidationError(context + ": bad number \"" + s + "\"");
  return v;
}

int to_int(const std::string& s, const std::string& context) {
  const double v = to_double(s, context);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ValidationError(context + ": expected integer, got \"" + s + "\"");
  return i;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Writer::Writer(const std::string& path) : out_(path) {
  if (!out_) throw ValidationError("cannot open file for writing: " + path);
}

Writer::~Writer() = default;

void Writer::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void Writer::raw(const std::string& line) { out_ << line << '\n'; }

}  // namespace dqm::csv
