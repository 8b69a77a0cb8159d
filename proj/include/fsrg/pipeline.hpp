#pragma once

#include "fsrg/config.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fsrg {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0;
  double threshold = 0;
  std::string note;
};

// Flat key=value summary plus named checks; artifacts are extra files
// (trace, spectrum, kernel dump) keyed by file name.
class Report {
 public:
  explicit Report(std::string kind) : kind_(std::move(kind)) {}

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, Complex value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  // value < threshold (or <= when inclusive) passes.
  void check_below(const std::string& name, double value, double threshold,
                   const std::string& note = "", bool inclusive = false);
  // value > threshold (or >= when inclusive) passes.
  void check_above(const std::string& name, double value, double threshold,
                   const std::string& note = "", bool inclusive = false);
  void check(const std::string& name, bool pass, const std::string& note = "");
  void note(const std::string& line) { notes_.push_back(line); }
  void artifact(const std::string& file, std::string content) { artifacts_[file] = std::move(content); }
  void merge(const Report& other, const std::string& prefix);

  const std::string& kind() const { return kind_; }
  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::map<std::string, std::string>& artifacts() const { return artifacts_; }
  const std::vector<std::string>& notes() const { return notes_; }
  bool all_pass() const;
  const Check* find(const std::string& name) const;

  std::string kv() const;
  std::string digest() const;

 private:
  std::string kind_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<Check> checks_;
  std::vector<std::string> notes_;
  std::map<std::string, std::string> artifacts_;
};

// Exit statuses of the command line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitFail = 2;

// hypotheses -> first Feshbach -> cascade -> eigenvectors -> oracle comparison.
Report run_pipeline(const RunConfig& cfg);
// Hypotheses only.
Report verify(const RunConfig& cfg);
// Contour, Cauchy-Riemann and reflection residuals of E_g(s).
Report analyticity_probe(const RunConfig& cfg);
// Oracle scaling of E_g - E_at over cfg.sweep, with RG values at each g.
Report sweep_g(const RunConfig& cfg);
// Seeded invariant suites of fock, symmetry, feshbach and kernels on the model.
Report property_suite(const RunConfig& cfg);

// Writes summary.kv / digest.txt per `formats` and every artifact into dir.
void write_report(const Report& r, const std::string& dir, const std::vector<std::string>& formats);

}  // namespace fsrg
