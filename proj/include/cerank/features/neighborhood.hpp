#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cerank/common.hpp"
#include "cerank/corpus.hpp"
#include "cerank/features/geo.hpp"
#include "cerank/io.hpp"
#include "cerank/text.hpp"

namespace cerank::features {

/// Which feature families enter the pair vector.
struct FeatureMask {
  bool tfidf = true;
  bool topics = true;
  bool embedding = true;
  bool sentiment = true;
  bool distance = true;
  bool common_users = true;

  static FeatureMask none() { return {false, false, false, false, false, false}; }

  /// Comma-separated family names: tfidf, topics, doc2vec, sentiment, distance, common-users, or "all".
  static FeatureMask parse(std::string_view spec) {
    FeatureMask m = none();
    std::string item;
    auto flush = [&] {
      if (item.empty()) return;
      if (item == "all") m = FeatureMask{};
      else if (item == "tfidf") m.tfidf = true;
      else if (item == "topics") m.topics = true;
      else if (item == "doc2vec" || item == "embedding") m.embedding = true;
      else if (item == "sentiment") m.sentiment = true;
      else if (item == "distance") m.distance = true;
      else if (item == "common-users" || item == "common_users") m.common_users = true;
      else throw InputError("unknown feature family '" + item + "'");
      item.clear();
    };
    for (char c : spec) {
      if (c == ',' || c == '+') flush();
      else if (c != ' ') item.push_back(c);
    }
    flush();
    if (!m.any()) throw InputError("feature mask selects no families");
    return m;
  }

  bool any() const { return tfidf || topics || embedding || sentiment || distance || common_users; }

  std::string to_string() const {
    std::vector<std::string> parts;
    if (embedding) parts.push_back("doc2vec");
    if (sentiment) parts.push_back("sentiment");
    if (common_users) parts.push_back("common-users");
    if (topics) parts.push_back("topics");
    if (distance) parts.push_back("distance");
    if (tfidf) parts.push_back("tfidf");
    return text::join(parts, "+");
  }

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
};

struct NeighborhoodFeatures {
  std::vector<double> tfidf;
  std::vector<double> topics;
  std::vector<double> embedding;
  std::array<double, 4> sentiment{};
  bool topics_fallback = false;
  bool embedding_fallback = false;

  std::size_t unit_dim(const FeatureMask& m) const {
    return (m.tfidf ? tfidf.size() : 0) + (m.topics ? topics.size() : 0) + (m.embedding ? embedding.size() : 0) +
           (m.sentiment ? sentiment.size() : 0);
  }
};

struct PairFeatures {
  double distance_norm = 0.0;
  double common_users = 0.0;
};

/// Pairwise centroid distances over the active neighborhood set, with the min and max
/// used for min-max normalization.
class DistanceTable {
 public:
  DistanceTable(const std::vector<std::string>& active, const std::map<std::string, corpus::LatLon>& centroids) {
    ids_ = active;
    std::sort(ids_.begin(), ids_.end());
    const auto n = ids_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!centroids.count(ids_[i])) throw InputError("no centroid for neighborhood " + ids_[i]);
      pos_.emplace(ids_[i], i);
    }
    dist_.assign(n * n, 0.0);
    bool first = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = haversine_km(centroids.at(ids_[i]), centroids.at(ids_[j]));
        dist_[i * n + j] = dist_[j * n + i] = d;
        if (first) {
          min_ = max_ = d;
          first = false;
        }
        min_ = std::min(min_, d);
        max_ = std::max(max_, d);
      }
  }

  double km(const std::string& a, const std::string& b) const { return dist_[index(a) * ids_.size() + index(b)]; }

  double normalized(const std::string& a, const std::string& b) const {
    const double range = max_ - min_;
    return range > 0.0 ? (km(a, b) - min_) / range : 0.0;
  }

  bool contains(const std::string& id) const { return pos_.count(id) > 0; }
  double min_km() const { return min_; }
  double max_km() const { return max_; }

 private:
  std::size_t index(const std::string& id) const {
    auto it = pos_.find(id);
    if (it == pos_.end()) throw InputError("neighborhood " + id + " is outside the active set");
    return it->second;
  }

  std::vector<std::string> ids_;
  std::map<std::string, std::size_t> pos_;
  std::vector<double> dist_;
  double min_ = 0.0, max_ = 0.0;
};

/// Distinct users that tweeted about each neighborhood.
inline std::map<std::string, std::set<std::string>> user_sets(const corpus::Association& assoc) {
  std::map<std::string, std::set<std::string>> out;
  for (auto& [nid, tweets] : assoc.tweets)
    for (auto& t : tweets) out[nid].insert(t.user_id);
  return out;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

inline PairFeatures pair_features(const std::string& a, const std::string& b,
                                  const std::map<std::string, std::set<std::string>>& users,
                                  const DistanceTable& distances) {
  if (!distances.contains(a) || !distances.contains(b))
    throw InputError("pair (" + a + "," + b + ") is outside the active set");
  static const std::set<std::string> kEmpty;
  auto ua = users.find(a);
  auto ub = users.find(b);
  return {distances.normalized(a, b),
          jaccard(ua == users.end() ? kEmpty : ua->second, ub == users.end() ? kEmpty : ub->second)};
}

/// [i blocks | j blocks | pairwise], blocks in the order tfidf, topics, embedding, sentiment.
inline std::vector<double> assemble_pair_vector(const NeighborhoodFeatures& fi, const NeighborhoodFeatures& fj,
                                                const PairFeatures& pf, const FeatureMask& mask) {
  if (fi.tfidf.size() != fj.tfidf.size() || fi.topics.size() != fj.topics.size() ||
      fi.embedding.size() != fj.embedding.size())
    throw Error("neighborhood features computed with mismatched configurations");
  std::vector<double> x;
  x.reserve(2 * fi.unit_dim(mask) + 2);
  for (const auto* f : {&fi, &fj}) {
    if (mask.tfidf) x.insert(x.end(), f->tfidf.begin(), f->tfidf.end());
    if (mask.topics) x.insert(x.end(), f->topics.begin(), f->topics.end());
    if (mask.embedding) x.insert(x.end(), f->embedding.begin(), f->embedding.end());
    if (mask.sentiment) x.insert(x.end(), f->sentiment.begin(), f->sentiment.end());
  }
  if (mask.distance) x.push_back(pf.distance_norm);
  if (mask.common_users) x.push_back(pf.common_users);
  return x;
}

/// Per-neighborhood and per-pair features for one corpus split.
struct FeatureSet {
  std::map<std::string, NeighborhoodFeatures> units;
  std::map<std::pair<std::string, std::string>, PairFeatures> pairs;  // keys with first < second

  const PairFeatures& pair(const std::string& a, const std::string& b) const {
    auto it = pairs.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    if (it == pairs.end()) throw InputError("no pair features for (" + a + "," + b + ")");
    return it->second;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (auto& [id, f] : units) out.push_back(id);
    return out;
  }
};

inline FeatureSet build_pair_table(std::map<std::string, NeighborhoodFeatures> units, const corpus::Association& assoc,
                                   const std::map<std::string, corpus::LatLon>& centroids) {
  FeatureSet fs;
  fs.units = std::move(units);
  const auto ids = fs.ids();
  const DistanceTable dist(ids, centroids);
  const auto users = user_sets(assoc);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) fs.pairs.emplace(std::make_pair(ids[i], ids[j]), pair_features(ids[i], ids[j], users, dist));
  return fs;
}

// features.jsonl / pairs.jsonl caches

inline void write_feature_set(const std::string& features_path, const std::string& pairs_path, const FeatureSet& fs) {
  std::ofstream fo(features_path);
  if (!fo) throw InputError("cannot write " + features_path);
  for (auto& [id, f] : fs.units) {
    nlohmann::json j = {{"neighborhood_id", id},
                        {"tfidf", f.tfidf},
                        {"topics", f.topics},
                        {"embedding", f.embedding},
                        {"sentiment", f.sentiment},
                        {"topics_fallback", f.topics_fallback},
                        {"embedding_fallback", f.embedding_fallback}};
    fo << j.dump() << '\n';
  }
  std::ofstream po(pairs_path);
  if (!po) throw InputError("cannot write " + pairs_path);
  for (auto& [key, p] : fs.pairs)
    po << nlohmann::json{{"i", key.first}, {"j", key.second}, {"distance_norm", p.distance_norm}, {"common_users", p.common_users}}.dump()
       << '\n';
}

inline FeatureSet read_feature_set(const std::string& features_path, const std::string& pairs_path) {
  FeatureSet fs;
  io::for_each_jsonl(features_path, [&](const nlohmann::json& j) {
    NeighborhoodFeatures f;
    f.tfidf = j.at("tfidf").get<std::vector<double>>();
    f.topics = j.at("topics").get<std::vector<double>>();
    f.embedding = j.at("embedding").get<std::vector<double>>();
    f.sentiment = j.at("sentiment").get<std::array<double, 4>>();
    f.topics_fallback = j.value("topics_fallback", false);
    f.embedding_fallback = j.value("embedding_fallback", false);
    fs.units.emplace(j.at("neighborhood_id").get<std::string>(), std::move(f));
  });
  io::for_each_jsonl(pairs_path, [&](const nlohmann::json& j) {
    auto a = j.at("i").get<std::string>(), b = j.at("j").get<std::string>();
    if (!(a < b)) std::swap(a, b);
    fs.pairs[{a, b}] = {j.at("distance_norm").get<double>(), j.at("common_users").get<double>()};
  });
  if (fs.units.size() < 2) throw InputError(features_path + ": need at least two neighborhoods");
  const auto n = fs.units.size();
  if (fs.pairs.size() != n * (n - 1) / 2) throw InputError(pairs_path + ": pair table incomplete");
  return fs;
}

}  // namespace cerank::features
