#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "cerank/ranker/ordering.hpp"
#include "test_util.hpp"

namespace cerank::ranker {
namespace {

// Compares the first input of i against the first input of j (one tfidf value per unit).
class CompareModel final : public LocalClassifier {
 public:
  explicit CompareModel(double band = 0.0, bool zero = false) : band_(band), zero_(zero) {}
  Proba predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override {
    if (zero_) return {0.0, 1.0, 0.0};
    const double d = x(0) - x(1);
    if (d > band_) return {0.1, 0.2, 0.7};
    if (d < -band_) return {0.7, 0.2, 0.1};
    return {0.2, 0.6, 0.2};
  }
  std::size_t input_dim() const override { return 2; }
  void write(io::BinaryWriter&) const override {}
  io::ArtifactKind artifact_kind() const override { return io::ArtifactKind::kLogisticRegression; }

 private:
  double band_;
  bool zero_;
};

features::FeatureMask tfidf_only() {
  auto m = features::FeatureMask::none();
  m.tfidf = true;
  return m;
}

features::FeatureSet scalar_features(const std::vector<double>& values) {
  features::FeatureSet fs;
  for (std::size_t k = 0; k < values.size(); ++k) {
    features::NeighborhoodFeatures f;
    f.tfidf = {values[k]};
    f.sentiment = {0, 0, 0, 0};
    fs.units[fmt::format("h{:03d}", k)] = f;
  }
  const auto ids = fs.ids();
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) fs.pairs[{ids[a], ids[b]}] = {0.5, 0.0};
  return fs;
}

TrainedRanker stub(std::unique_ptr<LocalClassifier> m, features::FeatureMask mask = tfidf_only()) {
  TrainedRanker r;
  r.kind = ClassifierKind::kLogReg;
  r.mask = mask;
  r.model = std::move(m);
  return r;
}

TEST(RankGlobally, ThreeNeighborhoodExample) {
  const auto fs = scalar_features({0.9, 0.5, 0.1});
  const auto r = rank_globally(stub(std::make_unique<CompareModel>()), fs.ids(), fs);
  EXPECT_EQ(r.scores, (std::vector<double>{2, 0, -2}));
  EXPECT_EQ(r.ordering.at(0, 1), 1);
  EXPECT_EQ(r.ordering.at(1, 0), -1);
  EXPECT_EQ(r.provenance.at("soft"), false);
}

TEST(RankGlobally, AllTieModelTiesEverything) {
  const auto fs = scalar_features({0.3, 0.1, 0.7, 0.2});
  const auto r = rank_globally(stub(std::make_unique<CompareModel>(0.0, true)), fs.ids(), fs);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.scores[i], 0.0);
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) {
        EXPECT_TRUE(r.ordering.tied(i, j));
      }
  }
}

TEST(RankGlobally, OracleModelRecoversTruth) {
  Rng rng(3);
  std::vector<double> v(30);
  for (auto& x : v) x = uniform01(rng);
  const auto fs = scalar_features(v);
  const auto r = rank_globally(stub(std::make_unique<CompareModel>()), fs.ids(), fs);
  EXPECT_EQ(metrics::tau_x(metrics::weak_ordering_from_values(v, 0.0), r.ordering), 1.0);
}

TEST(RankGlobally, ScoresSumToZeroAndStayBounded) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(12);
    for (auto& x : v) x = uniform01(rng);
    const auto fs = scalar_features(v);
    for (bool soft : {false, true}) {
      const auto r = rank_globally(stub(std::make_unique<CompareModel>(0.2)), fs.ids(), fs, soft);
      EXPECT_NEAR(std::accumulate(r.scores.begin(), r.scores.end(), 0.0), 0.0, 1e-9);
      for (double s : r.scores) EXPECT_LE(std::abs(s), 11.0);
    }
  }
}

TEST(RankGlobally, SoftModeUsesProbabilityMargin) {
  const auto fs = scalar_features({0.9, 0.1});
  const auto r = rank_globally(stub(std::make_unique<CompareModel>()), fs.ids(), fs, true);
  EXPECT_NEAR(r.scores[0], 0.6, 1e-12);
  EXPECT_NEAR(r.scores[1], -0.6, 1e-12);
}

TEST(RankGlobally, LayoutMismatch) {
  const auto fs = scalar_features({0.9, 0.1, 0.4});
  auto mask = tfidf_only();
  mask.distance = true;
  try {
    rank_globally(stub(std::make_unique<CompareModel>(), mask), fs.ids(), fs);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("feature layout mismatch"), std::string::npos);
  }
  EXPECT_THROW(rank_globally(stub(std::make_unique<CompareModel>()), {"h000", "nope"}, fs), InputError);
}

TEST(Aggregate, IdsAreSortedAndValidated) {
  const auto r = aggregate_local_ranks({"b", "a", "c"}, [](const std::string& i, const std::string& j) {
    return i < j ? 1.0 : -1.0;
  });
  EXPECT_EQ(r.ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(r.scores, (std::vector<double>{2, 0, -2}));
  EXPECT_EQ(r.score_map().at("c"), -2.0);
  EXPECT_THROW(aggregate_local_ranks({"a"}, [](auto&, auto&) { return 0.0; }), InputError);
}

TEST(Ranking, CompetitionRanksAndRoundTrip) {
  testing::TempDir dir;
  const auto path = dir.file("ranking.csv");
  write_ranking(path, {"d", "a", "c", "b"}, {1.0, 3.0, 2.0, 2.0});
  const auto lines = io::read_lines(path);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "neighborhood_id,score,rank");
  EXPECT_EQ(lines[1], "a,3,1");
  EXPECT_EQ(lines[2], "b,2,2");
  EXPECT_EQ(lines[3], "c,2,2");
  EXPECT_EQ(lines[4], "d,1,4");
  const auto back = read_ranking(path);
  EXPECT_EQ(back.at("b"), 2.0);
  EXPECT_EQ(back.size(), 4u);
}

TEST(Ranking, RejectsDuplicatesAndTinyFiles) {
  testing::TempDir dir;
  const auto path = dir.file("bad.csv");
  {
    std::ofstream f(path);
    f << "neighborhood_id,score,rank\na,1,1\na,2,1\n";
  }
  EXPECT_THROW(read_ranking(path), InputError);
  {
    std::ofstream f(path);
    f << "neighborhood_id,score,rank\na,1,1\n";
  }
  EXPECT_THROW(read_ranking(path), InputError);
}

TEST(TrainedRanker, SaveLoadRoundTrip) {
  testing::TempDir dir;
  Rng rng(5);
  std::vector<double> v(8);
  for (auto& x : v) x = uniform01(rng);
  const auto fs = scalar_features(v);
  std::map<std::string, double> e;
  for (std::size_t k = 0; k < v.size(); ++k) e[fs.ids()[k]] = v[k];
  const auto mask = tfidf_only();
  RankerConfig cfg;
  cfg.trees = 7;
  cfg.min_leaf = 2;
  const auto pairs = build_pairs(fs.ids(), fs, e, TieSpec::make(0.2, 0.25), mask);
  const auto r = TrainedRanker::train(pairs, ClassifierKind::kForest, cfg, mask, 0.2, 42);
  const auto path = dir.file("model.bin");
  r.save(path);
  const auto back = TrainedRanker::load(path);
  EXPECT_EQ(back.kind, ClassifierKind::kForest);
  EXPECT_EQ(back.mask, mask);
  EXPECT_EQ(back.coefficient, 0.2);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.config.trees, 7);
  EXPECT_EQ(back.config.min_leaf, 2);
  EXPECT_EQ(rank_globally(back, fs.ids(), fs).scores, rank_globally(r, fs.ids(), fs).scores);
  const auto js = nlohmann::json::parse(io::read_file(path + ".json"));
  EXPECT_EQ(js.at("kind"), "forest");
  EXPECT_EQ(js.at("features"), "tfidf");
  EXPECT_EQ(js.at("config").at("trees"), 7);
}

}  // namespace
}  // namespace cerank::ranker
