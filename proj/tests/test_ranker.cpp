#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "cerank/ranker/model_selection.hpp"
#include "test_util.hpp"

namespace cerank::ranker {
namespace {

features::FeatureSet toy_features(std::size_t m, Rng& rng) {
  features::FeatureSet fs;
  for (std::size_t k = 0; k < m; ++k) {
    features::NeighborhoodFeatures f;
    f.tfidf = {uniform01(rng)};
    f.topics = {0.5, 0.5};
    f.embedding = {uniform01(rng), uniform01(rng)};
    f.sentiment = {uniform01(rng), 0, 0, 0};
    fs.units[fmt::format("n{:03d}", k)] = f;
  }
  const auto ids = fs.ids();
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) fs.pairs[{ids[a], ids[b]}] = {uniform01(rng), uniform01(rng)};
  return fs;
}

std::map<std::string, double> toy_efficacy(const features::FeatureSet& fs, Rng& rng) {
  std::map<std::string, double> e;
  for (auto& id : fs.ids()) e[id] = uniform01(rng);
  return e;
}

// Pairs (u_i, u_j) labeled by u_i - u_j with a tie band of 0.2, keeping a margin from every
// class boundary so the three classes are linearly separable.
Dataset separable_pairs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  std::vector<std::array<double, 2>> rows;
  while (rows.size() < n) {
    const double a = uniform01(rng), b = uniform01(rng), diff = a - b;
    if (std::abs(std::abs(diff) - 0.2) < 0.05) continue;
    rows.push_back({a, b});
    d.y.push_back(local_rank_label(a, b, 0.2));
  }
  d.x.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t r = 0; r < n; ++r) {
    d.x(static_cast<Eigen::Index>(r), 0) = rows[r][0];
    d.x(static_cast<Eigen::Index>(r), 1) = rows[r][1];
  }
  return d;
}

double accuracy(const LocalClassifier& m, const Dataset& d) {
  const auto p = m.predict_all(d.x);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

TEST(TieSpec, ThresholdIsCoefficientTimesSigma) {
  const auto t = TieSpec::make(0.4, 0.25);
  EXPECT_EQ(t.threshold, 0.4 * 0.25);
  EXPECT_THROW(TieSpec::make(-0.1, 0.2), InputError);
}

TEST(LocalRank, Labels) {
  EXPECT_EQ(local_rank_label(0.50, 0.51, 0.02), 0);
  EXPECT_EQ(local_rank_label(0.51, 0.50, 0.02), 0);
  EXPECT_EQ(local_rank_label(0.9, 0.1, 0.0), 1);
  EXPECT_EQ(local_rank_label(0.1, 0.9, 0.0), -1);
  EXPECT_EQ(local_rank_label(0.3, 0.3, 0.0), 0);
}

TEST(BuildPairs, ThreeNeighborhoods) {
  Rng rng(1);
  const auto fs = toy_features(3, rng);
  std::map<std::string, double> e{{"n000", 0.9}, {"n001", 0.1}, {"n002", 0.5}};
  const auto pairs = build_pairs(fs.ids(), fs, e, TieSpec::make(0, 0), features::FeatureMask{});
  ASSERT_EQ(pairs.size(), 6u);
  EXPECT_EQ(pairs[0].i, "n000");
  EXPECT_EQ(pairs[0].j, "n001");
  EXPECT_EQ(pairs[0].label, 1);
  EXPECT_EQ(pairs[1].i, "n001");
  EXPECT_EQ(pairs[1].label, -1);
  EXPECT_EQ(pairs[0].x.size(), 2 * 9u + 2);
}

TEST(BuildPairs, MirrorClosureAndCount) {
  Rng rng(2);
  for (std::size_t m : {2u, 10u, 40u}) {
    const auto fs = toy_features(m, rng);
    const auto e = toy_efficacy(fs, rng);
    const auto pairs = build_pairs(fs.ids(), fs, e, TieSpec::make(0.5, 0.3), features::FeatureMask{});
    ASSERT_EQ(pairs.size(), m * (m - 1));
    std::map<std::pair<std::string, std::string>, const PairInstance*> by_key;
    for (auto& p : pairs) ASSERT_TRUE(by_key.emplace(std::make_pair(p.i, p.j), &p).second);
    const std::size_t u = fs.units.begin()->second.unit_dim(features::FeatureMask{});
    for (auto& p : pairs) {
      const auto& q = *by_key.at({p.j, p.i});
      EXPECT_EQ(q.label, -p.label);
      for (std::size_t k = 0; k < u; ++k) {
        EXPECT_EQ(p.x[k], q.x[u + k]);
        EXPECT_EQ(p.x[u + k], q.x[k]);
      }
      EXPECT_EQ(p.x[2 * u], q.x[2 * u]);
    }
  }
}

TEST(BuildPairs, Errors) {
  Rng rng(3);
  const auto fs = toy_features(3, rng);
  auto e = toy_efficacy(fs, rng);
  EXPECT_THROW(build_pairs({"n000"}, fs, e, {}, features::FeatureMask{}), InputError);
  e.erase("n002");
  EXPECT_THROW(build_pairs(fs.ids(), fs, e, {}, features::FeatureMask{}), InputError);
}

TEST(Dataset, ConversionAndSubset) {
  std::vector<PairInstance> p{{"a", "b", {1, 2}, 1}, {"b", "a", {2, 1}, -1}, {"a", "c", {3, 4}, 0}};
  const auto d = to_dataset(p);
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.x(2, 1), 4.0);
  std::vector<std::size_t> rows{2, 0};
  const auto s = subset(d, rows);
  EXPECT_EQ(s.y, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.x(0, 0), 3.0);
  EXPECT_EQ(distinct_labels(d.y), 3u);
}

TEST(LogReg, SeparableToyPairs) {
  const auto d = separable_pairs(400, 4);
  RankerConfig cfg;
  cfg.C = 10.0;
  const auto m = fit_classifier(ClassifierKind::kLogReg, d, cfg, 1);
  EXPECT_GE(accuracy(*m, d), 0.95);
  EXPECT_GE(accuracy(*m, separable_pairs(400, 5)), 0.95);
}

TEST(LogReg, StrongL1PenaltyZeroesIrrelevantWeights) {
  auto d = separable_pairs(300, 6);
  Matrix wide(d.x.rows(), 4);
  Rng rng(7);
  for (Eigen::Index r = 0; r < d.x.rows(); ++r) {
    wide(r, 0) = d.x(r, 0);
    wide(r, 1) = d.x(r, 1);
    wide(r, 2) = uniform01(rng) * 1e-3;
    wide(r, 3) = uniform01(rng) * 1e-3;
  }
  d.x = wide;
  RankerConfig cfg;
  cfg.C = 0.05;
  const auto m = LogisticRegression::fit(d, cfg);
  EXPECT_EQ(m.weights().col(2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(m.weights().col(3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Forest, SameSeedSamePredictions) {
  const auto d = separable_pairs(300, 8);
  RankerConfig cfg;
  cfg.trees = 25;
  const auto a = RandomForest::fit(d, cfg, 11), b = RandomForest::fit(d, cfg, 11);
  cfg.threads = 4;
  const auto c = RandomForest::fit(d, cfg, 11);
  const auto probe = separable_pairs(100, 9);
  for (Eigen::Index r = 0; r < probe.x.rows(); ++r) {
    EXPECT_EQ(a.predict_proba(probe.x.row(r)), b.predict_proba(probe.x.row(r)));
    EXPECT_EQ(a.predict_proba(probe.x.row(r)), c.predict_proba(probe.x.row(r)));
  }
  EXPECT_GE(accuracy(a, probe), 0.85);
}

TEST(Forest, LeafSizeAndProbabilities) {
  const auto d = separable_pairs(200, 10);
  RankerConfig cfg;
  cfg.trees = 5;
  cfg.min_leaf = 200;
  const auto f = RandomForest::fit(d, cfg, 1);
  for (auto& tree : f.trees()) EXPECT_EQ(tree.size(), 1u);
  const auto p = f.predict_proba(d.x.row(0));
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(Forest, ConstantFeaturesGiveSingleLeaf) {
  Dataset d;
  d.x = Matrix::Constant(40, 3, 1.0);
  for (int i = 0; i < 40; ++i) d.y.push_back(i % 2 ? 1 : -1);
  RankerConfig cfg;
  cfg.trees = 3;
  cfg.min_leaf = 1;
  const auto f = RandomForest::fit(d, cfg, 2);
  for (auto& tree : f.trees()) EXPECT_EQ(tree.size(), 1u);
}

TEST(Train, DegenerateLabels) {
  Dataset d;
  d.x = Matrix::Zero(10, 2);
  d.y.assign(10, 1);
  for (auto kind : {ClassifierKind::kLogReg, ClassifierKind::kForest, ClassifierKind::kMlp}) {
    try {
      fit_classifier(kind, d, RankerConfig{}, 1);
      FAIL();
    } catch (const InputError& e) {
      EXPECT_STREQ(e.what(), "degenerate labels");
    }
  }
}

TEST(Train, ArtifactRoundTripPerKind) {
  testing::TempDir dir;
  const auto d = separable_pairs(120, 12);
  RankerConfig cfg;
  cfg.trees = 10;
  cfg.hidden_units = 8;
  cfg.epochs = 5;
  for (auto kind : {ClassifierKind::kLogReg, ClassifierKind::kForest, ClassifierKind::kMlp}) {
    const auto m = fit_classifier(kind, d, cfg, 3);
    const auto path = dir.file(to_string(kind) + ".bin");
    io::BinaryWriter w(path, m->artifact_kind());
    m->write(w);
    w.close();
    io::BinaryReader r(path);
    EXPECT_EQ(kind_of(r.kind()), kind);
    const auto back = read_classifier(r);
    EXPECT_EQ(back->input_dim(), 2u);
    for (Eigen::Index row = 0; row < d.x.rows(); ++row) ASSERT_EQ(back->predict_proba(d.x.row(row)), m->predict_proba(d.x.row(row)));
  }
}

TEST(Kinds, ParseAndPrint) {
  EXPECT_EQ(parse_kind("forest"), ClassifierKind::kForest);
  EXPECT_EQ(parse_kind("lr"), ClassifierKind::kLogReg);
  EXPECT_EQ(to_string(ClassifierKind::kMlp), "mlp");
  EXPECT_THROW(parse_kind("svm"), InputError);
}

TEST(RankerConfig, SetAndValidate) {
  RankerConfig c;
  c.set("trees", "50");
  c.set("C", "0.5");
  c.set("bootstrap", "0");
  EXPECT_EQ(c.trees, 50);
  EXPECT_EQ(c.C, 0.5);
  EXPECT_FALSE(c.bootstrap);
  EXPECT_THROW(c.set("gamma", "1"), InputError);
  c.max_bins = 300;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_EQ(RankerConfig{}.to_json(ClassifierKind::kForest).at("trees"), 200);
  EXPECT_EQ(RankerConfig{}.to_json(ClassifierKind::kLogReg).at("penalty"), "l1");
}

TEST(MacroF1, HandComputedHalf) {
  // Each class: 1 TP, 1 FP, 1 FN -> P = R = 0.5.
  const std::vector<int> t{-1, -1, 0, 0, 1, 1}, p{-1, 0, 0, 1, 1, -1};
  EXPECT_DOUBLE_EQ(macro_f1(t, p), 0.5);
}

TEST(MacroF1, PerfectAndAbsentClasses) {
  const std::vector<int> t{-1, 1, 1, -1};
  EXPECT_EQ(macro_f1(t, t), 1.0);
  const std::vector<int> p{-1, 1, 0, -1};
  // classes -1: F1 1; +1: P 1, R 0.5 -> 2/3; 0: predicted only -> 0
  EXPECT_NEAR(macro_f1(t, p), (1.0 + 2.0 / 3.0 + 0.0) / 3.0, 1e-15);
  EXPECT_THROW(macro_f1(std::vector<int>{1}, std::vector<int>{}), InputError);
}

TEST(Folds, StratifiedAndSeeded) {
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(-1);
  for (int i = 0; i < 20; ++i) y.push_back(0);
  for (int i = 0; i < 31; ++i) y.push_back(1);
  const auto f = stratified_folds(y, 5, 9);
  EXPECT_EQ(f, stratified_folds(y, 5, 9));
  std::map<int, std::map<int, int>> per;
  for (std::size_t i = 0; i < y.size(); ++i) ++per[f[i]][y[i]];
  for (auto& [fold, counts] : per) {
    EXPECT_EQ(counts[-1], 10);
    EXPECT_EQ(counts[0], 4);
    EXPECT_GE(counts[1], 6);
    EXPECT_LE(counts[1], 7);
  }
  EXPECT_THROW(stratified_folds(y, 1, 9), InputError);
}

TEST(Grid, ParseCartesianProduct) {
  const auto g = parse_grid("trees=10,20;min_leaf=1,5,9", RankerConfig{});
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g[0].trees, 10);
  EXPECT_EQ(g[0].min_leaf, 1);
  EXPECT_EQ(g[1].min_leaf, 5);
  EXPECT_EQ(g[3].trees, 20);
  EXPECT_EQ(parse_grid("", RankerConfig{}).size(), 1u);
  EXPECT_THROW(parse_grid("trees", RankerConfig{}), InputError);
  EXPECT_THROW(parse_grid("trees=", RankerConfig{}), InputError);
  EXPECT_THROW(parse_grid("nope=1", RankerConfig{}), InputError);
}

TEST(Grid, SingletonAndTiesKeepFirst) {
  const auto d = separable_pairs(150, 13);
  RankerConfig base;
  base.trees = 5;
  auto r = grid_search(d, ClassifierKind::kForest, {base}, 3, 1);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(r.best.trees, 5);
  // Identical grid points score identically; the first must win.
  r = grid_search(d, ClassifierKind::kForest, {base, base, base}, 3, 1);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(r.mean_f1[0], r.mean_f1[2]);
  EXPECT_THROW(grid_search(d, ClassifierKind::kForest, {}, 3, 1), InputError);
}

TEST(Grid, PrefersBetterPoint) {
  const auto d = separable_pairs(300, 14);
  RankerConfig weak, strong;
  weak.C = 1e-4;
  strong.C = 10.0;
  const auto r = grid_search(d, ClassifierKind::kLogReg, {weak, strong}, 5, 2);
  EXPECT_EQ(r.best_index, 1u);
  EXPECT_GT(r.mean_f1[1], 0.9);
}

}  // namespace
}  // namespace cerank::ranker
