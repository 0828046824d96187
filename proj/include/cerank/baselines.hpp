#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cerank/corpus.hpp"
#include "cerank/metrics.hpp"

namespace cerank::baselines {

enum class Direction { kDescending, kAscending };

/// Ordering of `ids` (canonical ascending order) by a per-neighborhood metric. Equal metric
/// values tie.
inline metrics::ScoreMatrix rank_by_metric(const std::vector<std::string>& ids, const std::map<std::string, double>& metric,
                                           Direction direction = Direction::kDescending) {
  std::vector<double> v;
  v.reserve(ids.size());
  for (auto& id : ids) {
    auto it = metric.find(id);
    if (it == metric.end()) throw InputError("baseline metric missing for neighborhood " + id);
    v.push_back(direction == Direction::kDescending ? it->second : -it->second);
  }
  return metrics::weak_ordering_from_values(v, 0.0);
}

enum class CoordinateAxis { kLatLon, kLat, kLon };

/// Sorts centroids on the chosen key; the default is (lat, lon) lexicographic, descending.
/// Identical keys tie.
inline metrics::ScoreMatrix rank_by_coordinates(const std::vector<std::string>& ids,
                                                const std::map<std::string, corpus::LatLon>& centroids,
                                                CoordinateAxis axis = CoordinateAxis::kLatLon,
                                                Direction direction = Direction::kDescending) {
  std::vector<std::pair<double, double>> keys;
  for (auto& id : ids) {
    auto it = centroids.find(id);
    if (it == centroids.end()) throw InputError("no centroid for neighborhood " + id);
    switch (axis) {
      case CoordinateAxis::kLatLon: keys.emplace_back(it->second.lat, it->second.lon); break;
      case CoordinateAxis::kLat: keys.emplace_back(it->second.lat, 0.0); break;
      case CoordinateAxis::kLon: keys.emplace_back(it->second.lon, 0.0); break;
    }
  }
  // Dense rank of each key collapses the lexicographic order to one scalar.
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> v;
  for (auto& k : keys) {
    const auto r = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin());
    v.push_back(direction == Direction::kDescending ? r : -r);
  }
  return metrics::weak_ordering_from_values(v, 0.0);
}

/// The count metrics used by the non-learned baselines, over one association.
struct CountMetrics {
  std::map<std::string, double> tweets;
  std::map<std::string, double> users;
  std::map<std::string, double> venues;
};

inline CountMetrics count_metrics(const corpus::Association& assoc, const std::vector<std::string>& ids) {
  CountMetrics m;
  for (auto& id : ids) {
    auto t = assoc.tweets.find(id);
    std::set<std::string> users;
    if (t != assoc.tweets.end())
      for (auto& tw : t->second) users.insert(tw.user_id);
    auto v = assoc.venues.find(id);
    m.tweets[id] = t == assoc.tweets.end() ? 0.0 : static_cast<double>(t->second.size());
    m.users[id] = static_cast<double>(users.size());
    m.venues[id] = v == assoc.venues.end() ? 0.0 : static_cast<double>(v->second.size());
  }
  return m;
}

/// Population column as a metric; neighborhoods without a population count as 0.
inline std::map<std::string, double> population_metric(const std::vector<corpus::Neighborhood>& hoods) {
  std::map<std::string, double> m;
  for (auto& n : hoods) m[n.id] = n.population ? static_cast<double>(*n.population) : 0.0;
  return m;
}

}  // namespace cerank::baselines
