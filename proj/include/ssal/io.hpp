#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/linalg.hpp"

namespace ssal {

// ============================================================================
// Binary matrix / vector files
//
// Layout (all little-endian):
//   magic        8 bytes   "SSALMAT1" or "SSALVEC1"
//   fingerprint  u64       config fingerprint (0 when none applies)
//   rows         u64       (vectors: element count; no cols field)
//   cols         u64       (matrix only)
//   data         f64 * n   row-major
//
// This code assumes the host is little-endian IEEE-754 (asserted at build
// time below), which covers every target this project supports.
// ============================================================================

static_assert(sizeof(double) == 8, "doubles must be IEEE-754 64-bit");

namespace detail {

inline void write_u64(std::ofstream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

inline std::uint64_t read_u64(std::ifstream& in) {
  std::array<unsigned char, 8> b;
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw IoError("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

inline void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

inline void read_doubles(std::ifstream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw IoError("unexpected end of file");
}

}  // namespace detail

inline void write_matrix(const std::filesystem::path& path, const Matrix& m,
                         std::uint64_t fingerprint = 0) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write("SSALMAT1", 8);
  detail::write_u64(out, fingerprint);
  detail::write_u64(out, static_cast<std::uint64_t>(m.rows()));
  detail::write_u64(out, static_cast<std::uint64_t>(m.cols()));
  // Eigen default storage is column-major; emit row-major explicitly.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::RowVectorXd row = m.row(i);
    detail::write_doubles(out, row.data(), static_cast<std::size_t>(row.size()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline Matrix read_matrix(const std::filesystem::path& path,
                          std::uint64_t* fingerprint = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SSALMAT1", 8) != 0)
    throw IoError("bad matrix magic: " + path.string());
  std::uint64_t fp = detail::read_u64(in);
  if (fingerprint) *fingerprint = fp;
  auto rows = static_cast<Eigen::Index>(detail::read_u64(in));
  auto cols = static_cast<Eigen::Index>(detail::read_u64(in));
  if (rows < 0 || cols < 0 || rows * cols > (1ll << 32))
    throw IoError("unreasonable matrix dims: " + path.string());
  Matrix m(rows, cols);
  std::vector<double> buf(static_cast<std::size_t>(cols));
  for (Eigen::Index i = 0; i < rows; ++i) {
    detail::read_doubles(in, buf.data(), buf.size());
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = buf[static_cast<std::size_t>(j)];
  }
  return m;
}

inline void write_vector(const std::filesystem::path& path, const Vector& v,
                         std::uint64_t fingerprint = 0) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write("SSALVEC1", 8);
  detail::write_u64(out, fingerprint);
  detail::write_u64(out, static_cast<std::uint64_t>(v.size()));
  detail::write_doubles(out, v.data(), static_cast<std::size_t>(v.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline Vector read_vector(const std::filesystem::path& path,
                          std::uint64_t* fingerprint = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SSALVEC1", 8) != 0)
    throw IoError("bad vector magic: " + path.string());
  std::uint64_t fp = detail::read_u64(in);
  if (fingerprint) *fingerprint = fp;
  auto n = static_cast<Eigen::Index>(detail::read_u64(in));
  if (n < 0 || n > (1ll << 32)) throw IoError("unreasonable vector size: " + path.string());
  Vector v(n);
  detail::read_doubles(in, v.data(), static_cast<std::size_t>(n));
  return v;
}

// ============================================================================
// Text formats: CSV with a fingerprint comment line, and key=value files.
// ============================================================================

// Shortest-round-trip formatting for doubles, stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                             std::uint64_t fingerprint = 0) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# fingerprint=" << fingerprint << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// Ordered key=value file with '#' comment lines. Order is preserved on
// write; lookups are by key.
struct KvFile {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value) {
    for (auto& e : entries) {
      if (e.first == key) {
        e.second = value;
        return;
      }
    }
    entries.emplace_back(key, value);
  }
  bool has(const std::string& key) const {
    for (const auto& e : entries)
      if (e.first == key) return true;
    return false;
  }
  const std::string& get(const std::string& key) const {
    for (const auto& e : entries)
      if (e.first == key) return e.second;
    throw IoError("missing key: " + key);
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    for (const auto& e : entries)
      if (e.first == key) return e.second;
    return fallback;
  }
  double get_double(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw IoError("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw IoError("key " + key + " is not a number: " + s);
    }
  }
  std::int64_t get_int(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw IoError("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw IoError("key " + key + " is not an integer: " + s);
    }
  }
  std::uint64_t get_u64(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw IoError("trailing junk");
      return v;
    } catch (const std::exception&) {
      throw IoError("key " + key + " is not an unsigned integer: " + s);
    }
  }
};

inline void write_kv(const std::filesystem::path& path, const KvFile& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const auto& e : kv.entries) out << e.first << "=" << e.second << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

inline KvFile read_kv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  KvFile kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed line in " + path.string() + ": " + line);
    kv.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

// ============================================================================
// Histograms: fixed-width bins over [lo, hi], emitted as bin_left,count CSV.
// ============================================================================

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> counts;

  double bin_width() const {
    return (hi - lo) / static_cast<double>(counts.size());
  }
};

inline Histogram make_histogram(const std::vector<double>& values, double lo,
                                double hi, std::size_t bins) {
  if (!(hi > lo) || bins == 0) throw ContractViolation("make_histogram: bad range or bins");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;  // right edge
    ++h.counts[idx];
  }
  return h;
}

inline void write_histogram_csv(const std::filesystem::path& path, const Histogram& h,
                                std::uint64_t fingerprint = 0) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# fingerprint=" << fingerprint << "\n";
  out << "bin_left,count\n";
  const double width = h.bin_width();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << format_double(h.lo + width * static_cast<double>(i)) << "," << h.counts[i] << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ssal
