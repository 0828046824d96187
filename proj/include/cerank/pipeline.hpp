#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "cerank/baselines.hpp"
#include "cerank/config.hpp"
#include "cerank/corpus.hpp"
#include "cerank/features/doc_embedding.hpp"
#include "cerank/features/lda.hpp"
#include "cerank/features/neighborhood.hpp"
#include "cerank/features/sentiment.hpp"
#include "cerank/features/tfidf.hpp"
#include "cerank/metrics.hpp"
#include "cerank/ranker/model_selection.hpp"
#include "cerank/ranker/ordering.hpp"

namespace cerank::pipeline {

namespace fs = std::filesystem;

struct Inputs {
  std::vector<corpus::Neighborhood> neighborhoods;
  std::map<std::string, corpus::LatLon> centroids;
  std::vector<corpus::GazetteerEntry> gazetteer;
  std::vector<corpus::TweetRecord> tweets;
  std::vector<corpus::SurveyReport> surveys;
  std::vector<std::string> crime_lexicon;
  std::vector<features::LexiconScorer> scorers;

  std::vector<const features::SentimentScorer*> scorer_ptrs() const {
    std::vector<const features::SentimentScorer*> out;
    for (auto& s : scorers) out.push_back(&s);
    return out;
  }
};

inline std::vector<std::string> read_lexicon(const std::string& path) {
  std::vector<std::string> out;
  for (auto& line : io::read_lines(path))
    if (!line.empty()) out.push_back(line);
  if (out.empty()) throw InputError(path + ": empty lexicon");
  return out;
}

inline Inputs load_inputs(const config::ExperimentConfig& cfg) {
  Inputs in;
  in.neighborhoods = corpus::read_neighborhoods(cfg.path("neighborhoods.csv"));
  for (auto& n : in.neighborhoods) in.centroids[n.id] = n.centroid;
  in.gazetteer = corpus::read_gazetteer(cfg.path("gazetteer.csv"));
  in.tweets = corpus::read_tweets(cfg.path("tweets.jsonl"));
  in.surveys = corpus::read_surveys(cfg.path("surveys.csv"));
  in.crime_lexicon = read_lexicon(cfg.path(cfg.crime_lexicon));
  for (auto& p : cfg.sentiment_lexicons) in.scorers.push_back(features::LexiconScorer::from_file(cfg.path(p)));
  return in;
}

struct Prepared {
  corpus::EfficacyTable efficacy;
  corpus::CorpusSplit split;
  corpus::Association all, train, test;
  std::vector<std::string> candidates;  // efficacy, centroid and at least one associated tweet
};

inline Prepared prepare(const Inputs& in, const config::ExperimentConfig& cfg) {
  Prepared p;
  p.efficacy = corpus::compute_ground_truth(in.surveys, cfg.min_reports);
  p.all = corpus::associate_tweets(in.tweets, in.gazetteer);
  p.split = corpus::temporal_split(in.tweets, cfg.split_fraction);
  p.train = corpus::associate_tweets(p.split.train, in.gazetteer);
  p.test = corpus::associate_tweets(p.split.test, in.gazetteer);
  for (auto& [id, tweets] : p.all.tweets)
    if (!tweets.empty() && p.efficacy.efficacy.count(id) && in.centroids.count(id)) p.candidates.push_back(id);
  if (p.candidates.size() < 2) throw InputError("fewer than two neighborhoods have tweets, centroids and ground truth");
  return p;
}

/// Top `percent` of the candidates by associated tweet count, returned in id order.
inline std::vector<std::string> select_active(const Prepared& p, double percent, corpus::PercentRounding rounding) {
  std::map<std::string, std::size_t> counts;
  for (auto& id : p.candidates) counts[id] = p.all.tweets.at(id).size();
  auto ids = corpus::select_top_percent(counts, percent, rounding);
  std::sort(ids.begin(), ids.end());
  if (ids.size() < 2) throw InputError("top-percent selection left fewer than two neighborhoods");
  return ids;
}

inline double efficacy_sigma(const corpus::EfficacyTable& e, const std::vector<std::string>& ids) {
  std::vector<double> v;
  for (auto& id : ids) v.push_back(e.efficacy.at(id));
  return metrics::population_sd(v);
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

struct TextModels {
  text::Tokenizer tokenizer;
  features::TopicModel lda;
  features::DocEmbedder embedder;
  features::CrimeVocabulary vocab;
  std::optional<features::RpcCurve> rpc;
};

using TokenCache = std::unordered_map<std::string, text::Tokens>;

inline TokenCache tokenize_all(const std::vector<corpus::TweetRecord>& tweets, const text::Tokenizer& tok) {
  TokenCache out;
  for (auto& t : tweets) out.emplace(t.tweet_id, tok.tokenize(t.text));
  return out;
}

inline std::vector<text::Tokens> neighborhood_tokens(const corpus::Association& assoc, const std::string& id,
                                                     const TokenCache& tokens) {
  std::vector<text::Tokens> out;
  if (auto it = assoc.tweets.find(id); it != assoc.tweets.end())
    for (auto& t : it->second) out.push_back(tokens.at(t.tweet_id));
  return out;
}

/// Fits the topic model, document embedder and crime vocabulary on the training tweets of
/// the given neighborhoods. Each tweet is one document.
inline TextModels train_text_models(const Inputs& in, const Prepared& p, const std::vector<std::string>& ids,
                                    const config::ExperimentConfig& cfg, const TokenCache& tokens) {
  TextModels m{text::Tokenizer(cfg.tokens), {}, {}, {}, std::nullopt};
  std::set<std::string> seen;
  std::vector<text::Tokens> docs;
  std::vector<features::NeighborhoodDoc> hood_docs;
  for (auto& id : ids) {
    hood_docs.push_back(neighborhood_tokens(p.train, id, tokens));
    if (auto it = p.train.tweets.find(id); it != p.train.tweets.end())
      for (auto& t : it->second)
        if (seen.insert(t.tweet_id).second) docs.push_back(tokens.at(t.tweet_id));
  }
  if (docs.empty()) throw InputError("no training tweets for the selected neighborhoods");

  features::LdaConfig lda = cfg.lda;
  lda.seed = derive_seed(cfg.seed, "lda");
  if (!cfg.rpc_counts.empty()) {
    // Every tenth document is held out for the perplexity curve.
    std::vector<text::Tokens> fit, heldout;
    for (std::size_t d = 0; d < docs.size(); ++d) (d % 10 == 9 ? heldout : fit).push_back(docs[d]);
    auto [best, curve] = features::rpc_select(cfg.rpc_counts, [&](int k) {
      features::LdaConfig c = lda;
      c.topics = k;
      return features::perplexity(features::train_lda(fit, c, cfg.tokens), heldout, cfg.inference,
                                  derive_seed(cfg.seed, "perplexity"));
    });
    lda.topics = best;
    m.rpc = std::move(curve);
  }
  m.lda = features::train_lda(docs, lda, cfg.tokens);
  features::EmbedderConfig emb = cfg.embedding;
  emb.seed = derive_seed(cfg.seed, "doc2vec");
  m.embedder = features::train_doc_embedder(docs, emb);
  m.vocab = features::build_crime_vocabulary(hood_docs, in.crime_lexicon, m.tokenizer, cfg.max_terms);
  return m;
}

/// Unit features of `ids` from the tweets in `assoc`, plus the pair table over `ids`.
inline features::FeatureSet compute_feature_set(const Inputs& in, const TextModels& m, const corpus::Association& assoc,
                                                const std::vector<std::string>& ids, const config::ExperimentConfig& cfg,
                                                const TokenCache& tokens, std::string_view tag) {
  const auto scorers = in.scorer_ptrs();
  std::map<std::string, features::NeighborhoodFeatures> units;
  for (auto& id : ids) {
    const auto toks = neighborhood_tokens(assoc, id, tokens);
    std::vector<std::string> texts;
    if (auto it = assoc.tweets.find(id); it != assoc.tweets.end())
      for (auto& t : it->second) texts.push_back(t.text);
    features::NeighborhoodFeatures f;
    f.tfidf = features::tfidf_vector(toks, m.vocab);
    auto topics = features::topic_distribution(m.lda, toks, cfg.inference, derive_seed(cfg.seed, fmt::format("topics:{}:{}", tag, id)));
    f.topics = std::move(topics.theta);
    f.topics_fallback = topics.fallback;
    auto emb = features::embed_neighborhood(m.embedder, toks, derive_seed(cfg.seed, fmt::format("embed:{}:{}", tag, id)));
    f.embedding = std::move(emb.vector);
    f.embedding_fallback = emb.fallback;
    f.sentiment = features::sentiment_distribution(texts, scorers);
    units.emplace(id, std::move(f));
  }
  return features::build_pair_table(std::move(units), assoc, in.centroids);
}

/// The same units restricted to `ids`, with distances renormalized over the smaller set.
inline features::FeatureSet restrict_features(const features::FeatureSet& full, const std::vector<std::string>& ids,
                                              const corpus::Association& assoc,
                                              const std::map<std::string, corpus::LatLon>& centroids) {
  std::map<std::string, features::NeighborhoodFeatures> units;
  for (auto& id : ids) units.emplace(id, full.units.at(id));
  return features::build_pair_table(std::move(units), assoc, centroids);
}

struct SplitFeatures {
  features::FeatureSet train;
  features::FeatureSet test;
  std::optional<TextModels> models;  // empty when loaded from cache
};

inline std::uint64_t inputs_digest(const config::ExperimentConfig& cfg) {
  std::uint64_t h = fnv1a(cfg.feature_fingerprint());
  std::vector<std::string> files{"neighborhoods.csv", "gazetteer.csv", "tweets.jsonl", "surveys.csv", cfg.crime_lexicon};
  files.insert(files.end(), cfg.sentiment_lexicons.begin(), cfg.sentiment_lexicons.end());
  for (auto& f : files) h = mix_seed(h ^ fnv1a(io::read_file(cfg.path(f))));
  return h;
}

/// Train-split and test-split features for `ids`. With CERANK_CACHE_DIR set, results are
/// stored under a digest of the inputs and settings and reused on later runs.
inline SplitFeatures compute_features(const Inputs& in, const Prepared& p, const std::vector<std::string>& ids,
                                      const config::ExperimentConfig& cfg, bool use_cache = true) {
  std::optional<fs::path> cache;
  const char* dir = use_cache ? std::getenv("CERANK_CACHE_DIR") : nullptr;
  if (dir && *dir) {
    std::uint64_t h = inputs_digest(cfg);
    for (auto& id : ids) h = mix_seed(h ^ fnv1a(id));
    cache = fs::path(dir) / fmt::format("features-{:016x}", h);
    if (fs::exists(*cache / "complete")) {
      SplitFeatures out;
      out.train = features::read_feature_set((*cache / "train_features.jsonl").string(), (*cache / "train_pairs.jsonl").string());
      out.test = features::read_feature_set((*cache / "test_features.jsonl").string(), (*cache / "test_pairs.jsonl").string());
      return out;
    }
  }
  text::Tokenizer tok(cfg.tokens);
  const auto tokens = tokenize_all(in.tweets, tok);
  SplitFeatures out;
  out.models = train_text_models(in, p, ids, cfg, tokens);
  out.train = compute_feature_set(in, *out.models, p.train, ids, cfg, tokens, "train");
  out.test = compute_feature_set(in, *out.models, p.test, ids, cfg, tokens, "test");
  if (cache) {
    fs::create_directories(*cache);
    features::write_feature_set((*cache / "train_features.jsonl").string(), (*cache / "train_pairs.jsonl").string(), out.train);
    features::write_feature_set((*cache / "test_features.jsonl").string(), (*cache / "test_pairs.jsonl").string(), out.test);
    std::ofstream(*cache / "complete") << "ok\n";
    // Reload so fresh and cached runs see identical values.
    out.train = features::read_feature_set((*cache / "train_features.jsonl").string(), (*cache / "train_pairs.jsonl").string());
    out.test = features::read_feature_set((*cache / "test_features.jsonl").string(), (*cache / "test_pairs.jsonl").string());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training, ranking, evaluation
// ---------------------------------------------------------------------------

inline std::string coefficient_tag(double c) { return fmt::format("c{:.2f}", c); }

/// One ranker per tie coefficient, optionally grid-searched.
inline std::vector<ranker::TrainedRanker> train_rankers(const config::ExperimentConfig& cfg, const features::FeatureSet& train,
                                                        const corpus::EfficacyTable& efficacy,
                                                        const std::vector<std::string>& ids) {
  const double sigma = efficacy_sigma(efficacy, ids);
  std::vector<ranker::TrainedRanker> out;
  for (double c : cfg.coefficients) {
    const auto pairs = ranker::build_pairs(ids, train, efficacy.efficacy, ranker::TieSpec::make(c, sigma), cfg.mask);
    const auto seed = derive_seed(cfg.seed, "train:" + coefficient_tag(c));
    ranker::RankerConfig rc = cfg.ranker;
    if (!cfg.grid.empty()) {
      const auto grid = ranker::parse_grid(cfg.grid, cfg.ranker);
      rc = ranker::grid_search(ranker::to_dataset(pairs), cfg.classifier, grid, cfg.folds, seed).best;
    }
    out.push_back(ranker::TrainedRanker::train(pairs, cfg.classifier, rc, cfg.mask, c, seed));
  }
  return out;
}

struct CurveResult {
  std::string model_id;
  std::vector<double> coefficients;
  std::vector<double> strict;
  std::vector<double> projected;
  double auc_strict = 0.0;
  double auc_projected = 0.0;
};

/// Scores candidate orderings (one per coefficient) against the reference weak ordering at
/// threshold coefficient * sigma.
inline CurveResult evaluate_curve(const std::string& model_id, const std::map<std::string, double>& reference,
                                  const std::vector<double>& coefficients,
                                  const std::function<metrics::ScoreMatrix(std::size_t)>& candidate) {
  std::vector<double> values;
  for (auto& [id, v] : reference) values.push_back(v);
  const double sigma = metrics::population_sd(values);
  CurveResult r{model_id, coefficients, {}, {}, 0.0, 0.0};
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    const auto ref = metrics::weak_ordering_from_values(values, coefficients[k] * sigma);
    const auto cand = candidate(k);
    r.strict.push_back(metrics::tau_x(ref, cand));
    r.projected.push_back(metrics::tau_x_projected(ref, cand));
  }
  r.auc_strict = metrics::auc_erc(r.coefficients, r.strict);
  r.auc_projected = metrics::auc_erc(r.coefficients, r.projected);
  return r;
}

inline CurveResult evaluate_random(const std::map<std::string, double>& reference, const std::vector<double>& coefficients,
                                   int perms, std::uint64_t seed) {
  std::vector<double> values;
  for (auto& [id, v] : reference) values.push_back(v);
  const double sigma = metrics::population_sd(values);
  CurveResult r{"random", coefficients, {}, {}, 0.0, 0.0};
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    const double th = coefficients[k] * sigma;
    r.strict.push_back(metrics::random_baseline(values, th, perms, seed, metrics::TauMode::kStrict));
    r.projected.push_back(metrics::random_baseline(values, th, perms, seed, metrics::TauMode::kProjected));
  }
  r.auc_strict = metrics::auc_erc(r.coefficients, r.strict);
  r.auc_projected = metrics::auc_erc(r.coefficients, r.projected);
  return r;
}

/// Non-learned ordering of `ids` by name: tweets, users, venues, population, coordinates.
inline metrics::ScoreMatrix baseline_ordering(const std::string& kind, const std::vector<std::string>& ids, const Inputs& in,
                                              const corpus::Association& assoc,
                                              baselines::Direction dir = baselines::Direction::kDescending) {
  if (kind == "coordinates") return baselines::rank_by_coordinates(ids, in.centroids, baselines::CoordinateAxis::kLatLon, dir);
  if (kind == "population") return baselines::rank_by_metric(ids, baselines::population_metric(in.neighborhoods), dir);
  const auto m = baselines::count_metrics(assoc, ids);
  if (kind == "tweets") return baselines::rank_by_metric(ids, m.tweets, dir);
  if (kind == "users") return baselines::rank_by_metric(ids, m.users, dir);
  if (kind == "venues") return baselines::rank_by_metric(ids, m.venues, dir);
  throw InputError("unknown baseline '" + kind + "' (expected tweets, users, venues, population, coordinates or random)");
}

inline std::string model_id(const config::ExperimentConfig& cfg) {
  return fmt::format("{}:{}", ranker::to_string(cfg.classifier), cfg.mask.to_string());
}

struct Experiment {
  std::vector<std::string> ids;
  std::vector<ranker::RankingResult> rankings;  // one per coefficient
  std::vector<CurveResult> curves;              // model first, then baselines, then random
};

inline std::map<std::string, double> reference_values(const corpus::EfficacyTable& e, const std::vector<std::string>& ids) {
  std::map<std::string, double> out;
  for (auto& id : ids) out[id] = e.efficacy.at(id);
  return out;
}

/// Trains on train-split features, ranks with test-split features and scores the model and
/// every configured baseline.
inline Experiment run_experiment(const config::ExperimentConfig& cfg, const Inputs& in, const Prepared& p,
                                 const std::vector<std::string>& ids, const SplitFeatures& feats,
                                 bool with_baselines = true) {
  Experiment ex;
  ex.ids = ids;
  const auto reference = reference_values(p.efficacy, ids);
  const auto rankers = train_rankers(cfg, feats.train, p.efficacy, ids);
  for (auto& r : rankers) ex.rankings.push_back(ranker::rank_globally(r, ids, feats.test, cfg.soft));
  ex.curves.push_back(evaluate_curve(model_id(cfg), reference, cfg.coefficients,
                                     [&](std::size_t k) { return ex.rankings[k].ordering; }));
  if (with_baselines)
    for (auto& b : cfg.baselines) {
      const auto ord = baseline_ordering(b, ids, in, p.test);
      ex.curves.push_back(evaluate_curve("baseline:" + b, reference, cfg.coefficients, [&](std::size_t) { return ord; }));
    }
  ex.curves.push_back(evaluate_random(reference, cfg.coefficients, cfg.random_perms, derive_seed(cfg.seed, "random")));
  return ex;
}

inline std::string num(double v) { return fmt::format("{:.6f}", v); }

inline void write_eval(const std::string& path, const std::vector<CurveResult>& curves) {
  io::CsvWriter w(path, {"model_id", "coefficient", "tau_x_strict", "tau_x_projected", "auc_erc_strict", "auc_erc_projected"});
  for (auto& c : curves)
    for (std::size_t k = 0; k < c.coefficients.size(); ++k)
      w.row({c.model_id, fmt::format("{:.2f}", c.coefficients[k]), num(c.strict[k]), num(c.projected[k]), num(c.auc_strict),
             num(c.auc_projected)});
}

inline void write_tau_vs_coefficient(const std::string& path, const std::vector<CurveResult>& curves) {
  io::CsvWriter w(path, {"model_id", "mode", "coefficient", "tau_x"});
  for (auto& c : curves)
    for (auto [mode, values] : {std::pair{"strict", &c.strict}, std::pair{"projected", &c.projected}})
      for (std::size_t k = 0; k < c.coefficients.size(); ++k)
        w.row({c.model_id, mode, fmt::format("{:.2f}", c.coefficients[k]), num((*values)[k])});
}

struct TopkRow {
  double percent = 0.0;
  std::size_t n = 0;
  CurveResult curve;
};

inline void write_tau_vs_topk(const std::string& path, const std::vector<TopkRow>& rows) {
  io::CsvWriter w(path, {"top_percent", "n_neighborhoods", "model_id", "coefficient", "tau_x_strict", "tau_x_projected"});
  for (auto& r : rows)
    for (std::size_t k = 0; k < r.curve.coefficients.size(); ++k)
      w.row({fmt::format("{:g}", r.percent), std::to_string(r.n), r.curve.model_id, fmt::format("{:.2f}", r.curve.coefficients[k]),
             num(r.curve.strict[k]), num(r.curve.projected[k])});
}

/// End-to-end run: eval.csv, tau_vs_coefficient.csv, tau_vs_topk.csv and per-coefficient
/// ranking files in `out_dir`.
inline Experiment run_report(const config::ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const auto in = load_inputs(cfg);
  const auto p = prepare(in, cfg);
  const auto ids = select_active(p, cfg.top_percent, cfg.rounding);
  const auto feats = compute_features(in, p, ids, cfg);
  auto ex = run_experiment(cfg, in, p, ids, feats);
  const fs::path out(out_dir);
  write_eval((out / "eval.csv").string(), ex.curves);
  write_tau_vs_coefficient((out / "tau_vs_coefficient.csv").string(), ex.curves);
  for (std::size_t k = 0; k < ex.rankings.size(); ++k)
    ranker::write_ranking((out / fmt::format("ranking_{}.csv", coefficient_tag(cfg.coefficients[k]))).string(), ex.rankings[k]);

  // Data availability: the most-tweeted subsets of the evaluated neighborhoods.
  std::vector<TopkRow> rows;
  std::map<std::string, std::size_t> counts;
  for (auto& id : ids) counts[id] = p.all.tweets.at(id).size();
  for (double pct : cfg.topk) {
    auto sub = corpus::select_top_percent(counts, pct, cfg.rounding);
    std::sort(sub.begin(), sub.end());
    if (sub.size() < 10) continue;
    SplitFeatures sf;
    sf.train = restrict_features(feats.train, sub, p.train, in.centroids);
    sf.test = restrict_features(feats.test, sub, p.test, in.centroids);
    const auto sub_ex = run_experiment(cfg, in, p, sub, sf, false);
    for (auto& c : sub_ex.curves) rows.push_back({pct, sub.size(), c});
  }
  write_tau_vs_topk((out / "tau_vs_topk.csv").string(), rows);
  return ex;
}

}  // namespace cerank::pipeline
