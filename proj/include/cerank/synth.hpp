#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "cerank/common.hpp"
#include "cerank/corpus.hpp"
#include "cerank/features/geo.hpp"
#include "cerank/io.hpp"

namespace cerank::synth {

struct ScenarioConfig {
  int n_neighborhoods = 157;
  double tweets_log_mean = 6.2146;  // ln 500
  double tweets_log_sd = 0.3;
  double efficacy_spatial_corr = 0.5;
  double kernel_km = 4.0;
  double crime_rate_slope = 8.0;
  double sentiment_slope = 0.8;
  double sentiment_noise = 0.4;
  double sentiment_rate = 0.7;
  int user_pool = 2000;
  double overlap_decay = 10.0;
  int venues_per_neighborhood = 4;
  double ambiguous_fraction = 0.05;
  double unmatched_fraction = 0.05;
  int topics = 8;
  int words_per_topic = 30;
  double topic_slope = 3.0;
  int reports_per_neighborhood = 20;
  double survey_noise = 0.5;
  std::uint64_t seed = 7;

  void validate() const {
    if (n_neighborhoods < 2) throw InputError("n_neighborhoods must be >= 2");
    if (user_pool < 1) throw InputError("user_pool must be >= 1");
    if (!(overlap_decay > 0.0)) throw InputError("overlap_decay must be > 0");
    if (!(efficacy_spatial_corr >= 0.0 && efficacy_spatial_corr <= 1.0))
      throw InputError("efficacy_spatial_corr must be in [0,1]");
    if (!(tweets_log_sd >= 0.0) || !std::isfinite(tweets_log_mean) || tweets_log_mean < 0.0)
      throw InputError("infeasible tweet count distribution");
    if (venues_per_neighborhood < 1 || topics < 1 || words_per_topic < 1) throw InputError("infeasible vocabulary settings");
    if (reports_per_neighborhood < 0) throw InputError("reports_per_neighborhood must be >= 0");
    for (double p : {ambiguous_fraction, unmatched_fraction, sentiment_rate})
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("fractions must be in [0,1]");
  }
};

struct Scenario {
  std::vector<corpus::Neighborhood> neighborhoods;
  std::vector<corpus::GazetteerEntry> gazetteer;
  std::vector<corpus::TweetRecord> tweets;
  std::vector<corpus::SurveyReport> surveys;
  std::map<std::string, double> truth;
  std::vector<std::string> crime_lexicon;
  std::vector<std::pair<std::string, double>> sentiment_lexicon;
};

inline const std::vector<std::string>& crime_words() {
  static const std::vector<std::string> w = {
      "gun",     "shooting", "robbery",  "theft",    "police",   "crime",  "stabbing",  "drugs",
      "fight",   "arrest",   "burglary", "assault",  "murder",   "vandalism", "graffiti", "homicide",
      "siren",   "violence", "gang",     "stolen",   "dealer",   "cops",   "trash",     "litter",
      "abandoned", "danger", "unsafe",   "mugged",   "gunshots", "crash"};
  return w;
}

/// Words by sentiment bin, strongest negative first, with the lexicon score of each bin.
inline const std::array<std::pair<std::vector<std::string>, double>, 4>& sentiment_words() {
  static const std::array<std::pair<std::vector<std::string>, double>, 4> w = {{
      {{"terrible", "awful", "horrible", "hate"}, -0.9},
      {{"meh", "boring", "tired", "annoyed"}, -0.3},
      {{"nice", "fine", "okay", "decent"}, 0.3},
      {{"amazing", "love", "wonderful", "fantastic"}, 0.9},
  }};
  return w;
}

namespace detail {

// Consonant-vowel pseudo-words; none end in "s", "ed" or "ing", so the stemmer leaves them alone.
inline std::string pseudo_word(std::size_t k) {
  static constexpr char kC[] = "bdfgklmnprtvz";
  static constexpr char kV[] = "aiou";
  std::string w;
  for (int syl = 0; syl < 3; ++syl) {
    w.push_back(kC[k % 13]);
    k /= 13;
    w.push_back(kV[k % 4]);
    k /= 4;
  }
  return w;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline std::size_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = uniform01(rng) * cdf.back();
  return std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                               cdf.size() - 1);
}

}  // namespace detail

inline Scenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  const auto n = static_cast<std::size_t>(cfg.n_neighborhoods);
  Rng rng_geo(derive_seed(cfg.seed, "centroids"));
  Rng rng_eff(derive_seed(cfg.seed, "efficacy"));
  Rng rng_tw(derive_seed(cfg.seed, "tweets"));
  Rng rng_sv(derive_seed(cfg.seed, "surveys"));
  Rng rng_us(derive_seed(cfg.seed, "users"));

  // Neighborhoods scattered over a ~35 km box.
  for (std::size_t i = 0; i < n; ++i) {
    corpus::Neighborhood h;
    h.id = fmt::format("39049{:04d}{:02d}{}", i / 3 + 1, 0, i % 3 + 1);
    h.centroid = {39.80 + 0.30 * uniform01(rng_geo), -83.20 + 0.40 * uniform01(rng_geo)};
    h.population = static_cast<long long>(std::llround(std::exp(std::log(1200.0) + 0.4 * standard_normal(rng_geo))));
    sc.neighborhoods.push_back(h);
  }

  // Latent efficacy: Gaussian-kernel smoothed noise mixed with raw noise, min-max scaled.
  std::vector<double> z(n), smooth(n), e(n);
  for (auto& v : z) v = standard_normal(rng_eff);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = features::haversine_km(sc.neighborhoods[i].centroid, sc.neighborhoods[j].centroid) / cfg.kernel_km;
      const double k = std::exp(-0.5 * d * d);
      num += k * z[j];
      den += k;
    }
    smooth[i] = num / den;
  }
  auto standardize = [](std::vector<double>& v) {
    double m = 0.0, s = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) s += (x - m) * (x - m);
    s = std::sqrt(s / static_cast<double>(v.size()));
    for (auto& x : v) x = s > 0 ? (x - m) / s : 0.0;
  };
  standardize(smooth);
  for (std::size_t i = 0; i < n; ++i)
    e[i] = cfg.efficacy_spatial_corr * smooth[i] + (1.0 - cfg.efficacy_spatial_corr) * z[i];
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  const double emin = *lo, erange = *hi - *lo;
  for (auto& v : e) v = erange > 0 ? (v - emin) / erange : 0.5;
  for (std::size_t i = 0; i < n; ++i) sc.truth[sc.neighborhoods[i].id] = e[i];

  // Vocabulary: venue names, topic words, filler words.
  std::size_t next_word = 0;
  auto fresh = [&] { return detail::pseudo_word(next_word++); };
  std::vector<std::vector<std::string>> venues(n);
  std::vector<std::string> chains;
  for (int c = 0; c < 5; ++c) chains.push_back(fresh() + " " + fresh());
  for (std::size_t i = 0; i < n; ++i)
    for (int v = 0; v < cfg.venues_per_neighborhood; ++v) {
      const auto vid = fmt::format("v{}_{}", sc.neighborhoods[i].id, v);
      std::string surface;
      const bool ambiguous = uniform01(rng_tw) < cfg.ambiguous_fraction;
      if (ambiguous) {
        surface = chains[uniform_index(rng_tw, chains.size())];
      } else {
        surface = fresh() + " " + fresh();
      }
      venues[i].push_back(surface);
      sc.gazetteer.push_back({surface, vid, sc.neighborhoods[i].id, ambiguous});
    }
  std::vector<std::vector<std::string>> topic_words(static_cast<std::size_t>(cfg.topics));
  for (auto& t : topic_words)
    for (int w = 0; w < cfg.words_per_topic; ++w) t.push_back(fresh());
  std::vector<std::string> filler;
  for (int w = 0; w < 60; ++w) filler.push_back(fresh());
  // Each topic leans toward high or low efficacy by a fixed loading.
  std::vector<double> loading(topic_words.size());
  for (std::size_t k = 0; k < loading.size(); ++k)
    loading[k] = loading.size() == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(loading.size() - 1);

  // Users with a latent position; tweets pick users near their neighborhood's efficacy.
  std::vector<double> u(static_cast<std::size_t>(cfg.user_pool));
  for (auto& v : u) v = uniform01(rng_us);

  const long long t0 = 1483228800;  // 2017-01-01
  const long long span = 365LL * 86400;
  long long tweet_no = 0;
  const auto& senti = sentiment_words();
  for (std::size_t i = 0; i < n; ++i) {
    const auto count =
        static_cast<std::size_t>(std::llround(std::exp(cfg.tweets_log_mean + cfg.tweets_log_sd * standard_normal(rng_tw))));
    if (count == 0) throw InputError("scenario produced a neighborhood with zero tweets");
    std::vector<double> user_cdf(u.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) user_cdf[k] = acc += std::exp(-cfg.overlap_decay * std::abs(e[i] - u[k]));
    std::vector<double> topic_cdf(topic_words.size());
    acc = 0.0;
    for (std::size_t k = 0; k < topic_words.size(); ++k)
      topic_cdf[k] = acc += std::exp(cfg.topic_slope * loading[k] * (e[i] - 0.5) + 0.3 * standard_normal(rng_tw));
    const double p_crime = detail::logistic(cfg.crime_rate_slope * (0.5 - e[i]));

    for (std::size_t t = 0; t < count; ++t) {
      std::vector<std::string> words;
      const int n_filler = 1 + static_cast<int>(uniform_index(rng_tw, 2));
      for (int k = 0; k < n_filler; ++k) words.push_back(filler[uniform_index(rng_tw, filler.size())]);
      if (uniform01(rng_tw) >= cfg.unmatched_fraction) {
        words.push_back("at");
        words.push_back(venues[i][uniform_index(rng_tw, venues[i].size())]);
      }
      const auto& topic = topic_words[detail::sample_cdf(topic_cdf, rng_tw)];
      const int n_topic = 3 + static_cast<int>(uniform_index(rng_tw, 4));
      for (int k = 0; k < n_topic; ++k) words.push_back(topic[uniform_index(rng_tw, topic.size())]);
      if (uniform01(rng_tw) < p_crime) words.push_back(crime_words()[uniform_index(rng_tw, crime_words().size())]);
      if (uniform01(rng_tw) < cfg.sentiment_rate) {
        const double s = std::clamp(cfg.sentiment_slope * (e[i] - 0.5) + cfg.sentiment_noise * standard_normal(rng_tw), -1.0, 1.0);
        const int bin = s <= -0.5 ? 0 : s <= 0.0 ? 1 : s <= 0.5 ? 2 : 3;
        const auto& pool = senti[static_cast<std::size_t>(bin)].first;
        words.push_back(pool[uniform_index(rng_tw, pool.size())]);
      }
      if (uniform01(rng_tw) < 0.1) words.push_back("#" + topic[uniform_index(rng_tw, topic.size())]);

      corpus::TweetRecord tw;
      tw.tweet_id = fmt::format("t{:08d}", tweet_no++);
      tw.user_id = fmt::format("u{:05d}", detail::sample_cdf(user_cdf, rng_tw));
      tw.timestamp = t0 + static_cast<long long>(uniform_index(rng_tw, static_cast<std::size_t>(span)));
      for (std::size_t k = 0; k < words.size(); ++k) tw.text += (k ? " " : "") + words[k];
      sc.tweets.push_back(std::move(tw));
    }
  }

  // Surveys: three 1..5 items centered on 1 + 4e.
  long long report_no = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (int r = 0; r < cfg.reports_per_neighborhood; ++r) {
      corpus::SurveyReport rep{fmt::format("r{:07d}", report_no++), sc.neighborhoods[i].id, {}};
      for (auto& q : rep.responses)
        q = static_cast<int>(std::clamp<long long>(std::llround(1.0 + 4.0 * e[i] + cfg.survey_noise * standard_normal(rng_sv)), 1, 5));
      sc.surveys.push_back(rep);
    }

  sc.crime_lexicon = crime_words();
  for (auto extra : {"broken glass", "police sirens", "carjacking", "arson"}) sc.crime_lexicon.push_back(extra);
  for (auto& [pool, score] : senti)
    for (auto& w : pool) sc.sentiment_lexicon.emplace_back(w, score);
  return sc;
}

/// Writes neighborhoods.csv, gazetteer.csv, tweets.jsonl, surveys.csv, truth.csv,
/// crime_lexicon.txt and sentiment_lexicon.tsv into `dir`.
inline void write_scenario(const Scenario& sc, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  corpus::write_neighborhoods((d / "neighborhoods.csv").string(), sc.neighborhoods);
  corpus::write_gazetteer((d / "gazetteer.csv").string(), sc.gazetteer);
  corpus::write_tweets((d / "tweets.jsonl").string(), sc.tweets);
  corpus::write_surveys((d / "surveys.csv").string(), sc.surveys);
  {
    io::CsvWriter w((d / "truth.csv").string(), {"id", "efficacy"});
    for (auto& [id, v] : sc.truth) w.row({id, fmt::format("{:.17g}", v)});
  }
  std::ofstream lex(d / "crime_lexicon.txt");
  for (auto& t : sc.crime_lexicon) lex << t << '\n';
  std::ofstream sent(d / "sentiment_lexicon.tsv");
  for (auto& [w, s] : sc.sentiment_lexicon) sent << w << '\t' << fmt::format("{}", s) << '\n';
  if (!lex || !sent) throw InputError("cannot write lexicons in " + dir);
}

inline std::map<std::string, double> read_truth(const std::string& path) {
  const auto table = io::read_csv(path, {"id", "efficacy"});
  std::map<std::string, double> out;
  for (auto& row : table.rows) out[row[0]] = io::parse_double(row[1], "efficacy");
  return out;
}

}  // namespace cerank::synth
