#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ssal/attack.hpp"
#include "ssal/errors.hpp"
#include "ssal/io.hpp"

namespace ssal {

// ============================================================================
// Attack-success and identity-matching rates over result streams.
//
// IMR: fraction of targets whose adversarial image is identity-accepted at
//      the named threshold, attribute ignored. Denominator = all targets.
// ASR: fraction accepted AND attribute-positive. The caller is responsible
//      for pre-filtering the target set to attribute-negative identities so
//      the denominator matches the rate's intent; the fold itself counts
//      every result it is given.
// ============================================================================

struct MetricSummary {
  std::string mode;
  std::string attribute;
  Eigen::Index k = 0;
  Eigen::Index d = 0;
  double eta = 0.0;
  std::string tau_name;
  double tau = 0.0;
  double asr = 0.0;
  double imr = 0.0;
  int n_targets = 0;
  std::uint64_t seed = 0;
  std::uint64_t world_fingerprint = 0;
};

namespace detail {
inline bool accepted_at(const AttackResult& r, const std::string& tau_name) {
  auto it = r.accepted_at.find(tau_name);
  if (it == r.accepted_at.end())
    throw ContractViolation("metrics: result not evaluated at threshold " + tau_name);
  return !r.failed && it->second;
}
}  // namespace detail

inline double compute_imr(const std::vector<AttackResult>& results, const std::string& tau_name) {
  if (results.empty()) throw ContractViolation("compute_imr: empty result set");
  std::size_t hits = 0;
  for (const AttackResult& r : results)
    if (detail::accepted_at(r, tau_name)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

inline double compute_asr(const std::vector<AttackResult>& results, const std::string& tau_name) {
  if (results.empty()) throw ContractViolation("compute_asr: empty result set");
  std::size_t hits = 0;
  for (const AttackResult& r : results)
    if (detail::accepted_at(r, tau_name) && r.attribute_ok) ++hits;
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

// Re-derives accept decisions at a threshold from stored confidences. Failed
// results never accept.
inline void apply_threshold(std::vector<AttackResult>& results, const std::string& tau_name,
                            double tau) {
  for (AttackResult& r : results)
    r.accepted_at[tau_name] = !r.failed && r.target_confidence >= tau;
}

inline double binomial_stderr(double p, int n) {
  if (n <= 0) throw ContractViolation("binomial_stderr: n must be > 0");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// ============================================================================
// CSV emission. One row per (mode, threshold); the world fingerprint rides
// both as a column and as the leading comment every output file carries.
// ============================================================================

inline std::string summary_csv_header() {
  return "mode,attribute,k,d,eta,tau_name,tau,asr,imr,n,seed";
}

inline std::string summary_csv_row(const MetricSummary& s) {
  std::string row = s.mode + "," + s.attribute + "," + std::to_string(s.k) + "," +
                    std::to_string(s.d) + "," + format_double(s.eta) + "," + s.tau_name + "," +
                    format_double(s.tau) + "," + format_double(s.asr) + "," +
                    format_double(s.imr) + "," + std::to_string(s.n_targets) + "," +
                    std::to_string(s.seed);
  return row;
}

inline void write_summary_csv(const std::filesystem::path& path,
                              const std::vector<MetricSummary>& rows,
                              std::uint64_t fingerprint) {
  std::ofstream out(path);
  if (!out) throw IoError("write_summary_csv: cannot open " + path.string());
  out << "# fingerprint=" << fingerprint << "\n" << summary_csv_header() << "\n";
  for (const MetricSummary& s : rows) out << summary_csv_row(s) << "\n";
  if (!out) throw IoError("write_summary_csv: short write to " + path.string());
}

struct SummaryFile {
  std::uint64_t fingerprint = 0;
  std::vector<MetricSummary> rows;
};

inline SummaryFile read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_summary_csv: cannot open " + path.string());
  SummaryFile file;
  std::string line;
  bool have_fp = false, have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# fingerprint=", 0) == 0) {
      file.fingerprint = std::stoull(line.substr(14));
      have_fp = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (!have_header) {
      if (line != summary_csv_header())
        throw IoError("read_summary_csv: unexpected header in " + path.string());
      have_header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 11) throw IoError("read_summary_csv: malformed row in " + path.string());
    MetricSummary s;
    s.mode = cells[0];
    s.attribute = cells[1];
    s.k = std::stoll(cells[2]);
    s.d = std::stoll(cells[3]);
    s.eta = std::stod(cells[4]);
    s.tau_name = cells[5];
    s.tau = std::stod(cells[6]);
    s.asr = std::stod(cells[7]);
    s.imr = std::stod(cells[8]);
    s.n_targets = std::stoi(cells[9]);
    s.seed = std::stoull(cells[10]);
    s.world_fingerprint = file.fingerprint;
    file.rows.push_back(std::move(s));
  }
  if (!have_fp) throw IoError("read_summary_csv: missing fingerprint in " + path.string());
  if (!have_header) throw IoError("read_summary_csv: missing header in " + path.string());
  return file;
}

}  // namespace ssal
