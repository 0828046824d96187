#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <thread>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/ranker/classifier.hpp"

namespace cerank::ranker {

/// Random forest of gini trees. Split candidates come from per-feature thresholds: the
/// midpoints between distinct values when a feature has at most max_bins + 1 of them,
/// else max_bins quantile cut points.
class RandomForest final : public LocalClassifier {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    Proba proba{};
  };
  using Tree = std::vector<Node>;

  RandomForest() = default;
  RandomForest(std::size_t dim, std::vector<Tree> trees) : dim_(dim), trees_(std::move(trees)) {}

  static RandomForest fit(const Dataset& data, const RankerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (data.size() == 0) throw InputError("empty training set");
    const Binned binned(data, cfg.max_bins);
    const std::size_t d = data.dim();
    const std::size_t mtry =
        cfg.max_features > 0 ? std::min<std::size_t>(cfg.max_features, d)
                             : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
    std::vector<Tree> trees(cfg.trees);
    auto grow = [&](std::size_t t) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      trees[t] = TreeBuilder(binned, data.y, cfg, mtry, rng).build();
    };
    const int threads = std::max(1, std::min(cfg.threads, cfg.trees));
    if (threads == 1) {
      for (std::size_t t = 0; t < trees.size(); ++t) grow(t);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t t = static_cast<std::size_t>(w); t < trees.size(); t += static_cast<std::size_t>(threads)) grow(t);
        });
      for (auto& th : pool) th.join();
    }
    return RandomForest(d, std::move(trees));
  }

  /// Mean of the per-tree leaf class distributions.
  Proba predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
    Proba p{};
    for (const auto& tree : trees_) {
      std::int32_t node = 0;
      while (tree[node].feature >= 0)
        node = x(tree[node].feature) <= tree[node].threshold ? tree[node].left : tree[node].right;
      for (int k = 0; k < kNumClasses; ++k) p[k] += tree[node].proba[k];
    }
    for (auto& v : p) v /= static_cast<double>(trees_.size());
    return p;
  }

  std::size_t input_dim() const override { return dim_; }
  std::size_t num_trees() const { return trees_.size(); }
  const std::vector<Tree>& trees() const { return trees_; }
  io::ArtifactKind artifact_kind() const override { return io::ArtifactKind::kRandomForest; }

  void write(io::BinaryWriter& out) const override {
    out.u64(dim_);
    out.u64(trees_.size());
    for (const auto& tree : trees_) {
      out.u64(tree.size());
      for (const auto& n : tree) {
        out.i32(n.feature);
        out.f64(n.threshold);
        out.i32(n.left);
        out.i32(n.right);
        for (double v : n.proba) out.f64(v);
      }
    }
  }

  static std::unique_ptr<RandomForest> read(io::BinaryReader& in) {
    const auto dim = in.u64();
    const auto n_trees = in.u64();
    if (n_trees > (1u << 20)) throw InputError("corrupt forest artifact");
    std::vector<Tree> trees(n_trees);
    for (auto& tree : trees) {
      const auto n_nodes = in.u64();
      if (n_nodes == 0 || n_nodes > (1u << 26)) throw InputError("corrupt forest artifact");
      tree.resize(n_nodes);
      for (auto& n : tree) {
        n.feature = in.i32();
        n.threshold = in.f64();
        n.left = in.i32();
        n.right = in.i32();
        for (auto& v : n.proba) v = in.f64();
        const auto limit = static_cast<std::int32_t>(n_nodes);
        if (n.feature >= static_cast<std::int64_t>(dim) ||
            (n.feature >= 0 && (n.left <= 0 || n.left >= limit || n.right <= 0 || n.right >= limit)))
          throw InputError("corrupt forest artifact");
      }
    }
    return std::make_unique<RandomForest>(dim, std::move(trees));
  }

 private:
  // Column-major bin codes plus the thresholds each bin boundary corresponds to.
  struct Binned {
    std::size_t n = 0, d = 0;
    std::vector<std::uint8_t> codes;              // codes[f * n + i]
    std::vector<std::vector<double>> thresholds;  // bin(x) = #thresholds < x

    Binned(const Dataset& data, int max_bins) : n(data.size()), d(data.dim()), codes(n * d), thresholds(d) {
      std::vector<double> col(n);
      for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < n; ++i) col[i] = data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> uniq = sorted;
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        auto& th = thresholds[f];
        if (uniq.size() <= static_cast<std::size_t>(max_bins) + 1) {
          for (std::size_t k = 1; k < uniq.size(); ++k) th.push_back(uniq[k - 1] + (uniq[k] - uniq[k - 1]) / 2.0);
        } else {
          for (int k = 1; k <= max_bins; ++k) {
            const double q = sorted[std::min(n - 1, static_cast<std::size_t>(static_cast<double>(k) * n / (max_bins + 1)))];
            if (q < uniq.back() && (th.empty() || q > th.back())) th.push_back(q);
          }
        }
        for (std::size_t i = 0; i < n; ++i)
          codes[f * n + i] = static_cast<std::uint8_t>(std::lower_bound(th.begin(), th.end(), col[i]) - th.begin());
      }
    }
  };

  class TreeBuilder {
   public:
    TreeBuilder(const Binned& b, const std::vector<int>& y, const RankerConfig& cfg, std::size_t mtry, Rng& rng)
        : b_(b), y_(y), cfg_(cfg), mtry_(mtry), rng_(rng), hist_(256 * kNumClasses) {}

    Tree build() {
      std::vector<std::uint32_t> samples(b_.n);
      if (cfg_.bootstrap) {
        for (auto& s : samples) s = static_cast<std::uint32_t>(uniform_index(rng_, b_.n));
      } else {
        std::iota(samples.begin(), samples.end(), 0u);
      }
      features_.resize(b_.d);
      std::iota(features_.begin(), features_.end(), std::size_t{0});
      Tree tree;
      grow(tree, samples, 0, samples.size(), 0);
      return tree;
    }

   private:
    struct Split {
      std::size_t feature = 0;
      int bin = -1;
      double score = -1.0;
    };

    std::int32_t grow(Tree& tree, std::vector<std::uint32_t>& s, std::size_t begin, std::size_t end, int depth) {
      const auto id = static_cast<std::int32_t>(tree.size());
      tree.emplace_back();
      std::array<double, kNumClasses> counts{};
      for (std::size_t i = begin; i < end; ++i) counts[class_index(y_[s[i]])] += 1.0;
      const double n = static_cast<double>(end - begin);
      for (int k = 0; k < kNumClasses; ++k) tree[id].proba[k] = counts[k] / n;

      const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
      const bool depth_cap = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
      if (pure || depth_cap || end - begin < 2 * static_cast<std::size_t>(cfg_.min_leaf)) return id;

      double parent = 0.0;
      for (double c : counts) parent += c * c;
      parent /= n;
      const Split best = find_split(s, begin, end, parent);
      if (best.bin < 0) return id;

      const std::uint8_t* codes = &b_.codes[best.feature * b_.n];
      const auto mid = static_cast<std::size_t>(
          std::partition(s.begin() + static_cast<std::ptrdiff_t>(begin), s.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::uint32_t i) { return codes[i] <= best.bin; }) -
          s.begin());
      tree[id].feature = static_cast<std::int32_t>(best.feature);
      tree[id].threshold = b_.thresholds[best.feature][static_cast<std::size_t>(best.bin)];
      const auto left = grow(tree, s, begin, mid, depth + 1);
      const auto right = grow(tree, s, mid, end, depth + 1);
      tree[id].left = left;
      tree[id].right = right;
      return id;
    }

    // Scans shuffled features until mtry non-constant ones were examined and a valid split exists.
    Split find_split(const std::vector<std::uint32_t>& s, std::size_t begin, std::size_t end, double parent) {
      Split best;
      const std::size_t n = end - begin;
      const auto min_leaf = static_cast<double>(cfg_.min_leaf);
      std::size_t examined = 0;
      for (std::size_t k = 0; k < features_.size(); ++k) {
        if (examined >= mtry_ && best.bin >= 0) break;
        const std::size_t pick = k + uniform_index(rng_, features_.size() - k);
        std::swap(features_[k], features_[pick]);
        const std::size_t f = features_[k];
        const auto n_bins = b_.thresholds[f].size() + 1;
        if (n_bins < 2) continue;
        const std::uint8_t* codes = &b_.codes[f * b_.n];

        // Collect (bin, class) counts either densely or, for small nodes, by sorting.
        bins_.clear();
        if (n * 4 < n_bins) {
          pairs_.clear();
          for (std::size_t i = begin; i < end; ++i) pairs_.push_back(static_cast<std::uint16_t>(codes[s[i]] * 4 + class_index(y_[s[i]])));
          std::sort(pairs_.begin(), pairs_.end());
          for (auto p : pairs_) {
            const int bin = p / 4;
            if (bins_.empty() || bins_.back().bin != bin) bins_.push_back({bin, {}});
            bins_.back().counts[p % 4] += 1.0;
          }
        } else {
          std::fill(hist_.begin(), hist_.begin() + static_cast<std::ptrdiff_t>(n_bins * kNumClasses), 0.0);
          for (std::size_t i = begin; i < end; ++i) hist_[codes[s[i]] * kNumClasses + class_index(y_[s[i]])] += 1.0;
          for (std::size_t bin = 0; bin < n_bins; ++bin) {
            const double* h = &hist_[bin * kNumClasses];
            if (h[0] + h[1] + h[2] > 0) bins_.push_back({static_cast<int>(bin), {h[0], h[1], h[2]}});
          }
        }
        if (bins_.size() < 2) continue;
        ++examined;

        std::array<double, kNumClasses> total{};
        for (auto& bc : bins_)
          for (int c = 0; c < kNumClasses; ++c) total[c] += bc.counts[c];
        std::array<double, kNumClasses> left{};
        double left_n = 0.0;
        for (std::size_t q = 0; q + 1 < bins_.size(); ++q) {
          for (int c = 0; c < kNumClasses; ++c) left[c] += bins_[q].counts[c];
          left_n += bins_[q].counts[0] + bins_[q].counts[1] + bins_[q].counts[2];
          const double right_n = static_cast<double>(n) - left_n;
          if (left_n < min_leaf) continue;
          if (right_n < min_leaf) break;
          double ls = 0.0, rs = 0.0;
          for (int c = 0; c < kNumClasses; ++c) {
            ls += left[c] * left[c];
            const double r = total[c] - left[c];
            rs += r * r;
          }
          const double score = ls / left_n + rs / right_n;
          if (score > parent + 1e-12 && score > best.score) best = {f, bins_[q].bin, score};
        }
      }
      return best;
    }

    struct BinCounts {
      int bin;
      std::array<double, 4> counts;
    };

    const Binned& b_;
    const std::vector<int>& y_;
    const RankerConfig& cfg_;
    std::size_t mtry_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    std::vector<double> hist_;
    std::vector<std::uint16_t> pairs_;
    std::vector<BinCounts> bins_;
  };

  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace cerank::ranker
