#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cerank/common.hpp"
#include "cerank/features/neighborhood.hpp"

namespace cerank::ranker {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Local-rank classes. Index order (-1, 0, +1) is used by every classifier.
inline constexpr int kNumClasses = 3;
inline int class_index(int label) { return label + 1; }
inline int class_label(int index) { return index - 1; }

/// Pairs whose ground-truth efficacies differ by at most coefficient * sigma are tied.
struct TieSpec {
  double coefficient = 0.0;
  double sigma = 0.0;
  double threshold = 0.0;

  static TieSpec make(double coefficient, double sigma) {
    if (coefficient < 0.0 || sigma < 0.0) throw InputError("tie coefficient and sigma must be >= 0");
    return {coefficient, sigma, coefficient * sigma};
  }
};

inline int local_rank_label(double ci, double cj, double threshold) {
  const double d = ci - cj;
  if (std::abs(d) <= threshold) return 0;
  return d > 0 ? 1 : -1;
}

struct PairInstance {
  std::string i;
  std::string j;
  std::vector<double> x;
  int label = 0;
};

/// Both orientations of every unordered pair of `active` (taken in ascending id order):
/// (i, j, r) followed by (j, i, -r).
inline std::vector<PairInstance> build_pairs(std::vector<std::string> active, const features::FeatureSet& fs,
                                             const std::map<std::string, double>& efficacy, const TieSpec& tie,
                                             const features::FeatureMask& mask) {
  std::sort(active.begin(), active.end());
  if (active.size() < 2) throw InputError("need at least two neighborhoods to build pairs");
  for (auto& id : active) {
    if (!fs.units.count(id)) throw InputError("no features for neighborhood " + id);
    if (!efficacy.count(id)) throw InputError("no efficacy for neighborhood " + id);
  }
  std::vector<PairInstance> out;
  out.reserve(active.size() * (active.size() - 1));
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const auto& i = active[a];
      const auto& j = active[b];
      const auto& pf = fs.pair(i, j);
      const int r = local_rank_label(efficacy.at(i), efficacy.at(j), tie.threshold);
      out.push_back({i, j, features::assemble_pair_vector(fs.units.at(i), fs.units.at(j), pf, mask), r});
      out.push_back({j, i, features::assemble_pair_vector(fs.units.at(j), fs.units.at(i), pf, mask), -r});
    }
  return out;
}

/// Dense design matrix and labels in {-1, 0, +1}.
struct Dataset {
  Matrix x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

inline Dataset to_dataset(const std::vector<PairInstance>& pairs) {
  Dataset d;
  if (pairs.empty()) return d;
  const auto dim = pairs.front().x.size();
  d.x.resize(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(dim));
  d.y.reserve(pairs.size());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    if (pairs[r].x.size() != dim) throw Error("pair vectors differ in length");
    for (std::size_t c = 0; c < dim; ++c) d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pairs[r].x[c];
    d.y.push_back(pairs[r].label);
  }
  return d;
}

inline Dataset subset(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), d.x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = d.x.row(static_cast<Eigen::Index>(rows[r]));
    out.y.push_back(d.y[rows[r]]);
  }
  return out;
}

inline std::size_t distinct_labels(std::span<const int> y) {
  bool seen[kNumClasses] = {false, false, false};
  for (int v : y) {
    if (v < -1 || v > 1) throw InputError("local rank label out of {-1,0,1}");
    seen[class_index(v)] = true;
  }
  return static_cast<std::size_t>(seen[0]) + seen[1] + seen[2];
}

}  // namespace cerank::ranker
