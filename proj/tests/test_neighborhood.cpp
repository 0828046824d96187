#include <fstream>

#include <gtest/gtest.h>

#include "cerank/features/neighborhood.hpp"
#include "test_util.hpp"

namespace cerank::features {
namespace {

NeighborhoodFeatures unit(std::size_t v, std::size_t k, std::size_t dim, double base) {
  NeighborhoodFeatures f;
  for (std::size_t i = 0; i < v; ++i) f.tfidf.push_back(base + 0.001 * static_cast<double>(i));
  for (std::size_t i = 0; i < k; ++i) f.topics.push_back(1.0 / static_cast<double>(k));
  for (std::size_t i = 0; i < dim; ++i) f.embedding.push_back(base - 0.01 * static_cast<double>(i));
  f.sentiment = {0.1, 0.2, 0.3, base};
  return f;
}

TEST(FeatureMask, ParseAndPrint) {
  const auto m = FeatureMask::parse("doc2vec,sentiment,common-users,topics,distance");
  EXPECT_FALSE(m.tfidf);
  EXPECT_TRUE(m.embedding && m.sentiment && m.common_users && m.topics && m.distance);
  EXPECT_EQ(m.to_string(), "doc2vec+sentiment+common-users+topics+distance");
  EXPECT_EQ(FeatureMask::parse(m.to_string()), m);
  EXPECT_EQ(FeatureMask::parse("all"), FeatureMask{});
  EXPECT_THROW(FeatureMask::parse("doc2vec,colour"), InputError);
  EXPECT_THROW(FeatureMask::parse(""), InputError);
}

TEST(PairVector, AllFamiliesLength) {
  const auto a = unit(100, 70, 50, 0.1), b = unit(100, 70, 50, 0.2);
  EXPECT_EQ(assemble_pair_vector(a, b, {0.3, 0.4}, FeatureMask{}).size(), 450u);
}

TEST(PairVector, EmbeddingSentimentLengths) {
  const auto a = unit(100, 70, 50, 0.1), b = unit(100, 70, 50, 0.2);
  EXPECT_EQ(assemble_pair_vector(a, b, {}, FeatureMask::parse("doc2vec,sentiment")).size(), 108u);
  EXPECT_EQ(assemble_pair_vector(a, b, {}, FeatureMask::parse("doc2vec,sentiment,distance,common-users")).size(), 110u);
}

TEST(PairVector, LayoutAndSwapSymmetry) {
  const auto a = unit(3, 2, 4, 0.1), b = unit(3, 2, 4, 0.7);
  const PairFeatures pf{0.25, 0.5};
  const FeatureMask all;
  const auto xab = assemble_pair_vector(a, b, pf, all);
  const auto xba = assemble_pair_vector(b, a, pf, all);
  const std::size_t u = a.unit_dim(all);
  ASSERT_EQ(u, 13u);
  ASSERT_EQ(xab.size(), 2 * u + 2);
  EXPECT_EQ(xab[0], a.tfidf[0]);
  EXPECT_EQ(xab[3], a.topics[0]);
  EXPECT_EQ(xab[5], a.embedding[0]);
  EXPECT_EQ(xab[9], a.sentiment[0]);
  EXPECT_EQ(xab[2 * u], 0.25);
  EXPECT_EQ(xab[2 * u + 1], 0.5);
  for (std::size_t i = 0; i < u; ++i) {
    EXPECT_EQ(xab[i], xba[u + i]);
    EXPECT_EQ(xab[u + i], xba[i]);
  }
  EXPECT_EQ(xab[2 * u], xba[2 * u]);
}

TEST(PairVector, MismatchedConfigurations) {
  EXPECT_THROW(assemble_pair_vector(unit(3, 2, 4, 0), unit(3, 3, 4, 0), {}, FeatureMask{}), Error);
}

TEST(CommonUsers, Jaccard) {
  const std::set<std::string> a{"u1", "u2"}, b{"u2", "u3"}, c{"u9"};
  EXPECT_EQ(jaccard(a, a), 1.0);
  EXPECT_EQ(jaccard(a, c), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(a, b), 1.0 / 3.0);
  EXPECT_EQ(jaccard({}, {}), 0.0);
}

TEST(Distance, MinMaxNormalization) {
  const std::map<std::string, corpus::LatLon> c{{"A", {0, 0}}, {"B", {0, 1}}, {"C", {0, 3}}};
  const DistanceTable d({"A", "B", "C"}, c);
  EXPECT_DOUBLE_EQ(d.normalized("A", "C"), 1.0);
  EXPECT_DOUBLE_EQ(d.normalized("A", "B"), 0.0);
  EXPECT_NEAR(d.normalized("B", "C"), 0.5, 1e-12);
  EXPECT_NEAR(d.km("A", "B"), 111.1949, 0.01);
  EXPECT_THROW(d.km("A", "Z"), InputError);
  EXPECT_THROW(DistanceTable({"A", "Z"}, c), InputError);
}

TEST(PairFeatures, OutsideActiveSetIsAnError) {
  const std::map<std::string, corpus::LatLon> c{{"A", {0, 0}}, {"B", {0, 1}}, {"C", {0, 3}}};
  const DistanceTable d({"A", "B"}, c);
  EXPECT_THROW(pair_features("A", "C", {}, d), InputError);
}

TEST(FeatureSet, BuildWriteReadRoundTrip) {
  testing::TempDir dir;
  corpus::Association assoc;
  assoc.tweets["A"] = {{"1", "u1", 0, "x", {}}, {"2", "u2", 0, "x", {}}};
  assoc.tweets["B"] = {{"3", "u2", 0, "x", {}}};
  assoc.tweets["C"] = {{"4", "u3", 0, "x", {}}};
  std::map<std::string, NeighborhoodFeatures> units{
      {"A", unit(2, 3, 2, 0.1)}, {"B", unit(2, 3, 2, 1.0 / 3.0)}, {"C", unit(2, 3, 2, 0.123456789012345678)}};
  units["B"].topics_fallback = true;
  const std::map<std::string, corpus::LatLon> c{{"A", {39.9, -83.0}}, {"B", {40.0, -83.05}}, {"C", {39.95, -82.9}}};
  const auto fs = build_pair_table(units, assoc, c);
  ASSERT_EQ(fs.pairs.size(), 3u);
  EXPECT_DOUBLE_EQ(fs.pair("B", "A").common_users, 0.5);
  EXPECT_EQ(fs.pair("A", "C").common_users, 0.0);
  for (auto& [k, p] : fs.pairs) {
    EXPECT_GE(p.distance_norm, 0.0);
    EXPECT_LE(p.distance_norm, 1.0);
  }

  write_feature_set(dir.file("f.jsonl"), dir.file("p.jsonl"), fs);
  const auto back = read_feature_set(dir.file("f.jsonl"), dir.file("p.jsonl"));
  EXPECT_EQ(back.ids(), fs.ids());
  for (auto& [id, f] : fs.units) {
    EXPECT_EQ(back.units.at(id).tfidf, f.tfidf);
    EXPECT_EQ(back.units.at(id).embedding, f.embedding);
    EXPECT_EQ(back.units.at(id).sentiment, f.sentiment);
    EXPECT_EQ(back.units.at(id).topics_fallback, f.topics_fallback);
  }
  for (auto& [k, p] : fs.pairs) {
    EXPECT_EQ(back.pairs.at(k).distance_norm, p.distance_norm);
    EXPECT_EQ(back.pairs.at(k).common_users, p.common_users);
  }
}

TEST(FeatureSet, IncompletePairTableRejected) {
  testing::TempDir dir;
  std::ofstream(dir.file("f.jsonl"))
      << R"({"neighborhood_id":"A","tfidf":[],"topics":[1],"embedding":[0],"sentiment":[0,0,0,0]})" << '\n'
      << R"({"neighborhood_id":"B","tfidf":[],"topics":[1],"embedding":[0],"sentiment":[0,0,0,0]})" << '\n';
  std::ofstream(dir.file("p.jsonl")) << "";
  EXPECT_THROW(read_feature_set(dir.file("f.jsonl"), dir.file("p.jsonl")), InputError);
}

}  // namespace
}  // namespace cerank::features
