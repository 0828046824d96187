#include <gtest/gtest.h>

#include "cerank/baselines.hpp"

namespace cerank::baselines {
namespace {

const std::vector<std::string> kIds{"a", "b", "c"};

TEST(RankByMetric, DescendingChain) {
  const auto m = rank_by_metric(kIds, {{"a", 10}, {"b", 5}, {"c", 1}});
  EXPECT_EQ(m.at(0, 1), 1);
  EXPECT_EQ(m.at(1, 2), 1);
  EXPECT_EQ(m.at(2, 0), -1);
  EXPECT_TRUE(m.valid());
}

TEST(RankByMetric, EqualValuesTie) {
  const auto m = rank_by_metric(kIds, {{"a", 4}, {"b", 4}, {"c", 4}});
  EXPECT_EQ(metrics::count_tied_pairs(m), 6);
}

TEST(RankByMetric, AscendingIsExactReversal) {
  const std::map<std::string, double> v{{"a", 3}, {"b", 9}, {"c", 1}};
  const auto d = rank_by_metric(kIds, v), a = rank_by_metric(kIds, v, Direction::kAscending);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(d.at(i, j), -a.at(i, j));
      }
  EXPECT_EQ(metrics::tau_x(d, a), -1.0);
}

TEST(RankByMetric, MissingIdIsAnError) {
  EXPECT_THROW(rank_by_metric(kIds, {{"a", 1}, {"b", 2}}), InputError);
}

TEST(RankByCoordinates, HigherLatitudeFirst) {
  const std::map<std::string, corpus::LatLon> c{{"a", {39.9, -83.0}}, {"b", {40.1, -83.0}}, {"c", {40.1, -82.0}}};
  const auto m = rank_by_coordinates(kIds, c);
  EXPECT_EQ(m.at(1, 0), 1);
  EXPECT_EQ(m.at(2, 1), 1);  // same lat, larger lon
  EXPECT_TRUE(m.valid());
}

TEST(RankByCoordinates, IdenticalCentroidsTie) {
  const std::map<std::string, corpus::LatLon> c{{"a", {40, -83}}, {"b", {40, -83}}, {"c", {41, -83}}};
  EXPECT_TRUE(rank_by_coordinates(kIds, c).tied(0, 1));
}

TEST(RankByCoordinates, LongitudeAxisDirections) {
  const std::map<std::string, corpus::LatLon> c{{"a", {40, -83.2}}, {"b", {39, -83.1}}, {"c", {41, -83.0}}};
  const auto desc = rank_by_coordinates(kIds, c, CoordinateAxis::kLon);
  const auto asc = rank_by_coordinates(kIds, c, CoordinateAxis::kLon, Direction::kAscending);
  EXPECT_EQ(desc.at(2, 0), 1);
  EXPECT_EQ(metrics::tau_x(desc, asc), -1.0);
  EXPECT_THROW(rank_by_coordinates({"a", "z"}, c), InputError);
}

TEST(CountMetrics, TweetsUsersVenues) {
  corpus::Association assoc;
  assoc.tweets["a"] = {{"1", "u1", 0, "x", {}}, {"2", "u1", 0, "x", {}}, {"3", "u2", 0, "x", {}}};
  assoc.venues["a"] = {"v1", "v2"};
  const auto m = count_metrics(assoc, {"a", "b"});
  EXPECT_EQ(m.tweets.at("a"), 3.0);
  EXPECT_EQ(m.users.at("a"), 2.0);
  EXPECT_EQ(m.venues.at("a"), 2.0);
  EXPECT_EQ(m.tweets.at("b"), 0.0);
}

TEST(Population, MissingCountsAsZero) {
  std::vector<corpus::Neighborhood> h{{"a", {}, 500, 0}, {"b", {}, std::nullopt, 0}, {"c", {}, 900, 0}};
  const auto m = population_metric(h);
  EXPECT_EQ(m.at("b"), 0.0);
  const auto o = rank_by_metric(kIds, m);
  EXPECT_EQ(o.at(2, 0), 1);
  EXPECT_TRUE(o.valid());
}

}  // namespace
}  // namespace cerank::baselines
