#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cerank/common.hpp"

namespace cerank::io {

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting, header row required)
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) throw InputError("unterminated quoted CSV field");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError("missing CSV column '" + std::string(name) + "'");
  }
};

/// Reads a CSV file and checks that its header starts with `required` (in order).
inline CsvTable read_csv(const std::string& path, const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file, expected header");
  table.header = split_csv_line(line);
  if (table.header.size() < required.size())
    throw InputError(path + ": header has too few columns");
  for (std::size_t i = 0; i < required.size(); ++i)
    if (table.header[i] != required[i])
      throw InputError(path + ": expected column '" + required[i] + "' at position " +
                       std::to_string(i) + ", found '" + table.header[i] + "'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != table.header.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw InputError("cannot write " + path);
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_escape(fields[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("invalid number for " + std::string(what) + ": '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, std::string_view what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("invalid integer for " + std::string(what) + ": '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// JSON lines
// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object()) throw InputError(path + ":" + std::to_string(lineno) + ": expected object");
    try {
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Versioned binary artifacts: 8-byte magic, u32 format version, u32 kind tag.
// Integers and doubles are written little-endian in their native width.
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 8> kMagic{'C', 'E', 'R', 'A', 'N', 'K', '0', '1'};
inline constexpr std::uint32_t kFormatVersion = 1;

enum class ArtifactKind : std::uint32_t {
  kTopicModel = 1,
  kDocEmbedder = 2,
  kLogisticRegression = 3,
  kRandomForest = 4,
  kMlp = 5,
  kCrimeVocabulary = 6,
};

class BinaryWriter {
 public:
  BinaryWriter(const std::string& path, ArtifactKind kind)
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw InputError("cannot write " + path);
    out_.write(kMagic.data(), kMagic.size());
    u32(kFormatVersion);
    u32(static_cast<std::uint32_t>(kind));
  }

  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void strs(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
  }

  void close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_);
  }

 private:
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
 public:
  BinaryReader(const std::string& path, ArtifactKind expected) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw InputError("cannot open " + path);
    std::array<char, 8> magic{};
    in_.read(magic.data(), magic.size());
    if (!in_ || magic != kMagic) throw InputError(path + ": bad magic, not a model artifact");
    const auto version = u32();
    if (version != kFormatVersion)
      throw InputError(path + ": unsupported artifact version " + std::to_string(version));
    kind_ = static_cast<ArtifactKind>(u32());
    if (kind_ != expected) throw InputError(path + ": artifact kind mismatch");
  }

  /// Opens without checking the kind tag; inspect kind() afterwards.
  explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw InputError("cannot open " + path);
    std::array<char, 8> magic{};
    in_.read(magic.data(), magic.size());
    if (!in_ || magic != kMagic) throw InputError(path + ": bad magic, not a model artifact");
    const auto version = u32();
    if (version != kFormatVersion)
      throw InputError(path + ": unsupported artifact version " + std::to_string(version));
    kind_ = static_cast<ArtifactKind>(u32());
  }

  ArtifactKind kind() const { return kind_; }

  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int32_t i32() { return pod<std::int32_t>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    const auto n = checked_size(u64(), 1);
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  std::vector<double> f64s() {
    const auto n = checked_size(u64(), sizeof(double));
    std::vector<double> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    check();
    return v;
  }
  std::vector<std::string> strs() {
    const auto n = checked_size(u64(), 8);
    std::vector<std::string> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }

 private:
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  std::size_t checked_size(std::uint64_t n, std::size_t elem) {
    if (n > (std::uint64_t{1} << 34) / elem) throw InputError(path_ + ": corrupt length field");
    return static_cast<std::size_t>(n);
  }
  void check() {
    if (!in_) throw InputError(path_ + ": truncated artifact");
  }

  std::ifstream in_;
  std::string path_;
  ArtifactKind kind_{};
};

}  // namespace cerank::io
