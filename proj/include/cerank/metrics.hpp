#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cerank/common.hpp"

namespace cerank::metrics {

/// Weak ordering of n objects as an n x n score matrix: a(i,j) = +1 when i is ahead of or
/// tied with j, -1 when behind, 0 on the diagonal. Ties need not be transitive.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  explicit ScoreMatrix(std::size_t n) : n_(n), a_(n * n, 0) {}

  std::size_t size() const { return n_; }
  int at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, int v) { a_[i * n_ + j] = static_cast<std::int8_t>(v); }
  bool tied(std::size_t i, std::size_t j) const { return i != j && at(i, j) == 1 && at(j, i) == 1; }
  void tie(std::size_t i, std::size_t j) {
    set(i, j, 1);
    set(j, i, 1);
  }

  /// Zero diagonal, +/-1 off the diagonal, never mutually behind.
  bool valid() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const int v = at(i, j);
        if (i == j) {
          if (v != 0) return false;
        } else if (v != 1 && v != -1) {
          return false;
        } else if (v == -1 && at(j, i) != 1) {
          return false;
        }
      }
    return true;
  }

  /// Strict ordering where position 0 is ranked first.
  static ScoreMatrix from_positions(std::span<const std::size_t> position) {
    ScoreMatrix m(position.size());
    for (std::size_t i = 0; i < m.n_; ++i)
      for (std::size_t j = 0; j < m.n_; ++j)
        if (i != j) m.set(i, j, position[i] < position[j] ? 1 : -1);
    return m;
  }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::int8_t> a_;
};

/// Higher value ranks ahead; values within `threshold` of each other are tied.
inline ScoreMatrix weak_ordering_from_values(std::span<const double> values, double threshold) {
  if (!(threshold >= 0.0)) throw InputError("tie threshold must be >= 0");
  const std::size_t n = values.size();
  ScoreMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = values[i] - values[j];
      if (std::abs(d) <= threshold) {
        m.tie(i, j);
      } else {
        m.set(i, j, d > 0 ? 1 : -1);
        m.set(j, i, d > 0 ? -1 : 1);
      }
    }
  return m;
}

/// Same, indexing rows by ascending id.
inline ScoreMatrix weak_ordering_from_values(const std::map<std::string, double>& values, double threshold) {
  std::vector<double> v;
  v.reserve(values.size());
  for (auto& [id, x] : values) v.push_back(x);
  return weak_ordering_from_values(v, threshold);
}

/// Emond-Mason tau_x: normalized dot product of two score matrices.
inline double tau_x(const ScoreMatrix& a, const ScoreMatrix& b) {
  if (a.size() != b.size()) throw InputError("score matrices differ in size");
  const std::size_t n = a.size();
  if (n < 2) throw InputError("tau_x needs at least two objects");
  long long dot = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dot += a.at(i, j) * b.at(i, j);
  return static_cast<double>(dot) / static_cast<double>(n * (n - 1));
}

/// Copies every tie of `reference` into `candidate`.
inline ScoreMatrix project_ties(const ScoreMatrix& reference, ScoreMatrix candidate) {
  if (reference.size() != candidate.size()) throw InputError("score matrices differ in size");
  for (std::size_t i = 0; i < reference.size(); ++i)
    for (std::size_t j = i + 1; j < reference.size(); ++j)
      if (reference.tied(i, j)) candidate.tie(i, j);
  return candidate;
}

/// tau_x after projecting the reference's ties onto the candidate, so pairs the reference
/// treats as interchangeable always count as agreement.
inline double tau_x_projected(const ScoreMatrix& reference, const ScoreMatrix& candidate) {
  return tau_x(reference, project_ties(reference, candidate));
}

/// Ordered pairs (i, j), i != j, that are tied.
inline long long count_tied_pairs(const ScoreMatrix& m) {
  long long count = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m.tied(i, j)) ++count;
  return count;
}

/// Area under the tau_x-versus-tie-coefficient curve by the composite trapezoidal rule.
inline double auc_erc(std::span<const double> coefficients, std::span<const double> tau_values) {
  if (coefficients.size() != tau_values.size()) throw InputError("coefficients and tau values differ in length");
  if (coefficients.size() < 2) throw InputError("AUC-ERC needs at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < coefficients.size(); ++i) {
    if (!(coefficients[i] > coefficients[i - 1])) throw InputError("tie coefficients must be strictly increasing");
    area += 0.5 * (coefficients[i] - coefficients[i - 1]) * (tau_values[i] + tau_values[i - 1]);
  }
  return area;
}

struct TauReport {
  std::vector<double> coefficients;
  std::vector<double> tau_values;
  double auc_erc = 0.0;
};

inline TauReport make_tau_report(std::vector<double> coefficients, std::vector<double> tau_values) {
  TauReport r{std::move(coefficients), std::move(tau_values), 0.0};
  r.auc_erc = auc_erc(r.coefficients, r.tau_values);
  return r;
}

enum class TauMode { kStrict, kProjected };

inline double tau_x(const ScoreMatrix& reference, const ScoreMatrix& candidate, TauMode mode) {
  return mode == TauMode::kStrict ? tau_x(reference, candidate) : tau_x_projected(reference, candidate);
}

/// Population standard deviation (divides by N).
inline double population_sd(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

/// Mean tau_x of `n_perms` uniformly random strict orderings against the reference weak
/// ordering. Permutation p uses a seed derived from (seed, p).
inline double random_baseline(std::span<const double> reference_values, double threshold, int n_perms,
                              std::uint64_t seed, TauMode mode) {
  const std::size_t n = reference_values.size();
  if (n < 2) throw InputError("random baseline needs at least two objects");
  if (n_perms < 1) throw InputError("random baseline needs at least one permutation");
  const auto reference = weak_ordering_from_values(reference_values, threshold);
  double sum = 0.0;
  std::vector<std::size_t> position(n);
  for (int p = 0; p < n_perms; ++p) {
    std::iota(position.begin(), position.end(), std::size_t{0});
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
    portable_shuffle(position.begin(), position.end(), rng);
    sum += tau_x(reference, ScoreMatrix::from_positions(position), mode);
  }
  return sum / n_perms;
}

struct WilcoxonResult {
  double w_plus = 0.0;   // sum of ranks of positive differences y - x
  double p_two_sided = 1.0;
  std::size_t n = 0;     // pairs remaining after dropping zero differences
};

/// Signed-rank test on differences y - x with average ranks for tied magnitudes and a
/// continuity-corrected normal approximation (variance reduced for ties).
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("wilcoxon: samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] - x[i] != 0.0) d.push_back(y[i] - x[i]);
  if (d.empty()) throw InputError("degenerate");
  if (d.size() < 5) throw InputError("wilcoxon: need at least 5 nonzero differences");
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> rank(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  WilcoxonResult r;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) r.w_plus += rank[i];
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) {
    r.p_two_sided = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
  r.p_two_sided = std::erfc(z / std::sqrt(2.0));
  return r;
}

}  // namespace cerank::metrics
