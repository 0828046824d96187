#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cerank/common.hpp"
#include "cerank/io.hpp"
#include "cerank/text.hpp"

namespace cerank::corpus {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct TweetRecord {
  std::string tweet_id;
  std::string user_id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string text;
  std::optional<LatLon> geo;
};

struct GazetteerEntry {
  std::string surface;  // lowercased
  std::string venue_id;
  std::string neighborhood_id;
  bool ambiguous = false;
};

struct Neighborhood {
  std::string id;  // census block group code
  LatLon centroid;
  std::optional<long long> population;
  long long venue_count = 0;
};

struct SurveyReport {
  std::string report_id;
  std::string neighborhood_id;
  std::array<int, 3> responses{};
};

/// Normalized ground-truth collective efficacy. Ordered maps keep ids canonical.
struct EfficacyTable {
  std::map<std::string, double> efficacy;
  std::map<std::string, long long> report_counts;
};

struct CorpusSplit {
  std::vector<TweetRecord> train;
  std::vector<TweetRecord> test;
  double split_fraction = 0.9;
};

/// Tweets per neighborhood plus the distinct unambiguous venues each neighborhood was matched through.
struct Association {
  std::map<std::string, std::vector<TweetRecord>> tweets;
  std::map<std::string, std::set<std::string>> venues;
};

// ---------------------------------------------------------------------------
// Association
// ---------------------------------------------------------------------------

/// Surface index built from raw entries. A surface is ambiguous when flagged, or when it
/// maps to more than one venue or neighborhood.
class Gazetteer {
 public:
  struct Target {
    std::string venue_id;
    std::string neighborhood_id;
    bool ambiguous = false;
  };

  explicit Gazetteer(const std::vector<GazetteerEntry>& entries) {
    if (entries.empty()) throw InputError("empty gazetteer");
    std::map<std::vector<std::string>, std::vector<const GazetteerEntry*>> grouped;
    for (const auto& e : entries) {
      auto toks = text::plain_tokens(e.surface);
      if (toks.empty()) throw InputError("gazetteer surface '" + e.surface + "' has no tokens");
      grouped[toks].push_back(&e);
    }
    for (auto& [toks, group] : grouped) {
      std::set<std::string> venues, hoods;
      bool flagged = false;
      for (auto* e : group) {
        venues.insert(e->venue_id);
        hoods.insert(e->neighborhood_id);
        flagged = flagged || e->ambiguous;
      }
      Target t{group.front()->venue_id, group.front()->neighborhood_id,
               flagged || venues.size() > 1 || hoods.size() > 1};
      max_len_ = std::max(max_len_, toks.size());
      index_.emplace(text::join(toks), std::move(t));
    }
  }

  /// Longest-match-first scan over the lowercased plain tokens of `text`.
  std::vector<const Target*> match(std::string_view tweet_text) const {
    const auto toks = text::plain_tokens(tweet_text);
    std::vector<const Target*> hits;
    std::size_t pos = 0;
    while (pos < toks.size()) {
      std::size_t matched = 0;
      for (std::size_t len = std::min(max_len_, toks.size() - pos); len >= 1; --len) {
        std::string key = toks[pos];
        for (std::size_t k = 1; k < len; ++k) key += " " + toks[pos + k];
        if (auto it = index_.find(key); it != index_.end()) {
          hits.push_back(&it->second);
          matched = len;
          break;
        }
      }
      pos += matched ? matched : 1;
    }
    return hits;
  }

 private:
  std::unordered_map<std::string, Target> index_;
  std::size_t max_len_ = 0;
};

/// Assigns each tweet to every neighborhood reached through an unambiguous surface.
/// Tweets whose matches are all ambiguous, or that match nothing, are dropped.
inline Association associate_tweets(const std::vector<TweetRecord>& tweets,
                                    const std::vector<GazetteerEntry>& gazetteer) {
  const Gazetteer gz(gazetteer);
  Association out;
  for (const auto& t : tweets) {
    std::map<std::string, std::set<std::string>> hoods;
    for (const auto* hit : gz.match(t.text))
      if (!hit->ambiguous) hoods[hit->neighborhood_id].insert(hit->venue_id);
    for (auto& [nid, venues] : hoods) {
      out.tweets[nid].push_back(t);
      out.venues[nid].insert(venues.begin(), venues.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

inline EfficacyTable compute_ground_truth(const std::vector<SurveyReport>& reports, long long min_reports = 5) {
  std::map<std::string, std::pair<double, long long>> sums;
  for (const auto& r : reports) {
    for (int v : r.responses)
      if (v < 1 || v > 5) throw InputError("survey response out of range in report " + r.report_id);
    const double score = (r.responses[0] + r.responses[1] + r.responses[2]) / 3.0;
    auto& [sum, count] = sums[r.neighborhood_id];
    sum += score;
    ++count;
  }
  std::map<std::string, double> raw;
  EfficacyTable table;
  for (auto& [nid, sc] : sums) {
    if (sc.second < min_reports) continue;
    raw[nid] = sc.first / static_cast<double>(sc.second);
    table.report_counts[nid] = sc.second;
  }
  if (raw.size() < 2) throw InputError("degenerate normalization");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end(),
                                            [](auto& a, auto& b) { return a.second < b.second; });
  const double min = lo->second, range = hi->second - lo->second;
  if (!(range > 0.0)) throw InputError("degenerate normalization");
  for (auto& [nid, v] : raw) table.efficacy[nid] = (v - min) / range;
  return table;
}

// ---------------------------------------------------------------------------
// Splits and subsets
// ---------------------------------------------------------------------------

/// Orders by (timestamp, tweet_id); the first ceil(fraction * n) tweets become train.
inline CorpusSplit temporal_split(std::vector<TweetRecord> tweets, double fraction = 0.9) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("split fraction must be in (0,1)");
  if (tweets.empty()) throw InputError("cannot split an empty corpus");
  std::sort(tweets.begin(), tweets.end(), [](const TweetRecord& a, const TweetRecord& b) {
    return std::tie(a.timestamp, a.tweet_id) < std::tie(b.timestamp, b.tweet_id);
  });
  const auto n = tweets.size();
  // Guard against 0.9 * 10 landing at 9.000000000000002.
  const auto n_train = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  CorpusSplit split;
  split.split_fraction = fraction;
  split.train.assign(std::make_move_iterator(tweets.begin()),
                     std::make_move_iterator(tweets.begin() + static_cast<std::ptrdiff_t>(n_train)));
  split.test.assign(std::make_move_iterator(tweets.begin() + static_cast<std::ptrdiff_t>(n_train)),
                    std::make_move_iterator(tweets.end()));
  if (split.test.empty()) std::cerr << "warning: temporal split left the test set empty\n";
  return split;
}

enum class PercentRounding { kCeil, kFloor };

/// Neighborhoods by descending tweet count (ties by id), truncated to the top `percent`.
/// kFloor reproduces published subset sizes (157 of 393 at 40%).
inline std::vector<std::string> select_top_percent(const std::map<std::string, std::size_t>& counts,
                                                   double percent,
                                                   PercentRounding rounding = PercentRounding::kCeil) {
  if (counts.empty()) throw InputError("empty association");
  if (!(percent > 0.0 && percent <= 100.0)) throw InputError("percent must be in (0,100]");
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.second > b.second; });
  const double exact = percent / 100.0 * static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(rounding == PercentRounding::kCeil ? std::ceil(exact - 1e-9)
                                                                      : std::floor(exact + 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(sorted[i].first);
  return out;
}

inline std::vector<std::string> select_top_percent(const Association& assoc, double percent,
                                                   PercentRounding rounding = PercentRounding::kCeil) {
  std::map<std::string, std::size_t> counts;
  for (auto& [nid, tw] : assoc.tweets) counts[nid] = tw.size();
  return select_top_percent(counts, percent, rounding);
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

inline TweetRecord tweet_from_json(const nlohmann::json& j) {
  TweetRecord t;
  t.tweet_id = j.at("tweet_id").get<std::string>();
  t.user_id = j.at("user_id").get<std::string>();
  t.timestamp = j.at("timestamp").get<std::int64_t>();
  t.text = j.at("text").get<std::string>();
  const bool has_lat = j.contains("lat") && !j["lat"].is_null();
  const bool has_lon = j.contains("lon") && !j["lon"].is_null();
  if (has_lat != has_lon) throw InputError("tweet " + t.tweet_id + ": lat and lon must appear together");
  if (has_lat) {
    t.geo = LatLon{j["lat"].get<double>(), j["lon"].get<double>()};
    if (!t.geo->valid()) throw InputError("tweet " + t.tweet_id + ": coordinates out of range");
  }
  if (t.tweet_id.empty()) throw InputError("tweet with empty tweet_id");
  if (t.text.empty()) throw InputError("tweet " + t.tweet_id + ": empty text");
  return t;
}

inline nlohmann::json tweet_to_json(const TweetRecord& t) {
  nlohmann::json j = {{"tweet_id", t.tweet_id}, {"user_id", t.user_id}, {"timestamp", t.timestamp}, {"text", t.text}};
  if (t.geo) {
    j["lat"] = t.geo->lat;
    j["lon"] = t.geo->lon;
  }
  return j;
}

inline std::vector<TweetRecord> read_tweets(const std::string& path) {
  std::vector<TweetRecord> out;
  std::set<std::string> ids;
  io::for_each_jsonl(path, [&](const nlohmann::json& j) {
    auto t = tweet_from_json(j);
    if (!ids.insert(t.tweet_id).second) throw InputError("duplicate tweet_id " + t.tweet_id);
    out.push_back(std::move(t));
  });
  return out;
}

inline void write_tweets(const std::string& path, const std::vector<TweetRecord>& tweets) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& t : tweets) out << tweet_to_json(t).dump() << '\n';
}

inline bool parse_flag01(const std::string& s, std::string_view what) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw InputError("expected 0 or 1 for " + std::string(what) + ", got '" + s + "'");
}

inline std::vector<GazetteerEntry> read_gazetteer(const std::string& path) {
  auto table = io::read_csv(path, {"surface", "venue_id", "neighborhood_id", "ambiguous"});
  std::vector<GazetteerEntry> out;
  for (auto& row : table.rows) {
    GazetteerEntry e{text::lower_ascii(row[0]), row[1], row[2], parse_flag01(row[3], "ambiguous")};
    if (e.surface.empty()) throw InputError(path + ": empty surface");
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_gazetteer(const std::string& path, const std::vector<GazetteerEntry>& entries) {
  io::CsvWriter w(path, {"surface", "venue_id", "neighborhood_id", "ambiguous"});
  for (auto& e : entries) w.row({e.surface, e.venue_id, e.neighborhood_id, e.ambiguous ? "1" : "0"});
}

inline std::vector<SurveyReport> read_surveys(const std::string& path) {
  auto table = io::read_csv(path, {"report_id", "neighborhood_id", "q1", "q2", "q3"});
  std::vector<SurveyReport> out;
  for (auto& row : table.rows) {
    SurveyReport r{row[0], row[1], {}};
    for (int k = 0; k < 3; ++k) {
      const auto v = io::parse_int(row[2 + k], "survey response");
      if (v < 1 || v > 5) throw InputError(path + ": response out of range in report " + r.report_id);
      r.responses[k] = static_cast<int>(v);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_surveys(const std::string& path, const std::vector<SurveyReport>& reports) {
  io::CsvWriter w(path, {"report_id", "neighborhood_id", "q1", "q2", "q3"});
  for (auto& r : reports)
    w.row({r.report_id, r.neighborhood_id, std::to_string(r.responses[0]), std::to_string(r.responses[1]),
           std::to_string(r.responses[2])});
}

inline std::vector<Neighborhood> read_neighborhoods(const std::string& path) {
  auto table = io::read_csv(path, {"id", "lat", "lon", "population"});
  std::vector<Neighborhood> out;
  std::set<std::string> ids;
  for (auto& row : table.rows) {
    Neighborhood n;
    n.id = row[0];
    n.centroid = {io::parse_double(row[1], "lat"), io::parse_double(row[2], "lon")};
    if (!n.centroid.valid()) throw InputError(path + ": centroid out of range for " + n.id);
    if (!row[3].empty()) {
      n.population = io::parse_int(row[3], "population");
      if (*n.population < 0) throw InputError(path + ": negative population for " + n.id);
    }
    if (!ids.insert(n.id).second) throw InputError(path + ": duplicate neighborhood id " + n.id);
    out.push_back(std::move(n));
  }
  return out;
}

inline void write_neighborhoods(const std::string& path, const std::vector<Neighborhood>& hoods) {
  io::CsvWriter w(path, {"id", "lat", "lon", "population"});
  for (auto& n : hoods)
    w.row({n.id, fmt::format("{:.6f}", n.centroid.lat), fmt::format("{:.6f}", n.centroid.lon),
           n.population ? std::to_string(*n.population) : std::string()});
}

inline void write_efficacy(const std::string& path, const EfficacyTable& table) {
  io::CsvWriter w(path, {"id", "efficacy", "report_count"});
  for (auto& [nid, v] : table.efficacy)
    w.row({nid, fmt::format("{:.17g}", v), std::to_string(table.report_counts.at(nid))});
}

inline EfficacyTable read_efficacy(const std::string& path) {
  auto table = io::read_csv(path, {"id", "efficacy", "report_count"});
  EfficacyTable out;
  for (auto& row : table.rows) {
    const double v = io::parse_double(row[1], "efficacy");
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw InputError(path + ": efficacy out of [0,1] for " + row[0]);
    out.efficacy[row[0]] = v;
    out.report_counts[row[0]] = io::parse_int(row[2], "report_count");
  }
  if (out.efficacy.size() < 2) throw InputError(path + ": need at least two neighborhoods");
  return out;
}

/// assoc.jsonl: one {"tweet_id","neighborhood_id"} object per assignment, neighborhoods in id order.
inline void write_association(const std::string& path, const Association& assoc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (auto& [nid, tweets] : assoc.tweets)
    for (auto& t : tweets) out << nlohmann::json{{"tweet_id", t.tweet_id}, {"neighborhood_id", nid}}.dump() << '\n';
}

/// Rebuilds an association from assoc.jsonl and the tweet file it was computed from.
inline Association read_association(const std::string& path, const std::vector<TweetRecord>& tweets) {
  std::unordered_map<std::string, const TweetRecord*> by_id;
  for (auto& t : tweets) by_id.emplace(t.tweet_id, &t);
  Association assoc;
  io::for_each_jsonl(path, [&](const nlohmann::json& j) {
    const auto tid = j.at("tweet_id").get<std::string>();
    const auto nid = j.at("neighborhood_id").get<std::string>();
    auto it = by_id.find(tid);
    if (it == by_id.end()) throw InputError(path + ": unknown tweet_id " + tid);
    assoc.tweets[nid].push_back(*it->second);
  });
  return assoc;
}

}  // namespace cerank::corpus
