#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/ranker/train.hpp"

namespace cerank::ranker {

/// Unweighted mean of per-class F1 over the classes that occur in either sequence.
inline double macro_f1(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw InputError("label sequences differ in length");
  if (y_true.empty()) throw InputError("macro_f1 of empty sequences");
  std::array<double, kNumClasses> tp{}, fp{}, fn{};
  std::array<bool, kNumClasses> present{};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = class_index(y_true[i]), p = class_index(y_pred[i]);
    present[t] = present[p] = true;
    if (t == p) {
      tp[t] += 1;
    } else {
      fp[p] += 1;
      fn[t] += 1;
    }
  }
  double sum = 0.0;
  int classes = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    if (!present[k]) continue;
    ++classes;
    const double denom = 2 * tp[k] + fp[k] + fn[k];
    sum += denom > 0 ? 2 * tp[k] / denom : 0.0;
  }
  return sum / classes;
}

/// Fold index per sample. Each class is shuffled and dealt round-robin, continuing the deal
/// where the previous class stopped.
inline std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed) {
  if (folds < 2) throw InputError("folds must be >= 2");
  if (y.size() < static_cast<std::size_t>(folds)) throw InputError("fewer samples than folds");
  std::vector<int> fold(y.size(), -1);
  Rng rng(seed);
  int next = 0;
  for (int k = 0; k < kNumClasses; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (class_index(y[i]) == k) members.push_back(i);
    portable_shuffle(members.begin(), members.end(), rng);
    for (auto i : members) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

/// Cartesian product over "key=v1,v2;key2=v3" applied on top of `base`. The first key
/// varies slowest.
inline std::vector<RankerConfig> parse_grid(const std::string& spec, const RankerConfig& base) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto semi = spec.find(';', pos);
    if (semi == std::string::npos) semi = spec.size();
    const auto item = spec.substr(pos, semi - pos);
    pos = semi + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("bad grid entry '" + item + "'");
    std::vector<std::string> values;
    std::size_t p = eq + 1;
    while (p <= item.size()) {
      auto comma = item.find(',', p);
      if (comma == std::string::npos) comma = item.size();
      if (comma > p) values.push_back(item.substr(p, comma - p));
      p = comma + 1;
    }
    if (values.empty()) throw InputError("grid entry '" + item + "' has no values");
    axes.emplace_back(item.substr(0, eq), std::move(values));
  }
  std::vector<RankerConfig> grid{base};
  for (auto& [key, values] : axes) {
    std::vector<RankerConfig> next;
    for (auto& g : grid)
      for (auto& v : values) {
        RankerConfig c = g;
        c.set(key, v);
        c.validate();
        next.push_back(c);
      }
    grid = std::move(next);
  }
  return grid;
}

struct GridResult {
  std::size_t best_index = 0;
  RankerConfig best;
  std::vector<double> mean_f1;  // aligned with the grid
};

/// Stratified k-fold cross-validated macro-F1 per grid point; the highest mean wins and
/// ties keep the earliest point.
inline GridResult grid_search(const Dataset& data, ClassifierKind kind, const std::vector<RankerConfig>& grid, int folds,
                              std::uint64_t seed) {
  if (grid.empty()) throw InputError("empty hyperparameter grid");
  const auto fold = stratified_folds(data.y, folds, derive_seed(seed, "folds"));
  GridResult result;
  double best = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
      const auto train = subset(data, train_rows);
      const auto test = subset(data, test_rows);
      const auto model = fit_classifier(kind, train, grid[g], derive_seed(seed, static_cast<std::uint64_t>(f)));
      total += macro_f1(test.y, model->predict_all(test.x));
    }
    result.mean_f1.push_back(total / folds);
    if (result.mean_f1.back() > best) {
      best = result.mean_f1.back();
      result.best_index = g;
    }
  }
  result.best = grid[result.best_index];
  return result;
}

}  // namespace cerank::ranker
