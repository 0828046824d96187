#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/io.hpp"
#include "cerank/text.hpp"

namespace cerank::features {

struct LdaConfig {
  int topics = 70;
  double alpha = 0.0;  // <= 0 selects 50 / topics
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 1;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / topics; }
};

/// Fold-in Gibbs settings for inferring a document's topic mixture under fixed topics.
struct InferenceConfig {
  int burn_in = 100;
  int samples = 20;
};

class TopicModel {
 public:
  TopicModel() = default;

  TopicModel(int topics, double alpha, double beta, std::vector<std::string> vocab, std::vector<double> topic_word)
      : topics_(topics), alpha_(alpha), beta_(beta), vocab_(std::move(vocab)), topic_word_(std::move(topic_word)) {
    if (topics_ < 1) throw Error("topic model needs at least one topic");
    if (topic_word_.size() != static_cast<std::size_t>(topics_) * vocab_.size())
      throw Error("topic-word matrix does not match vocabulary");
    for (std::size_t w = 0; w < vocab_.size(); ++w) index_.emplace(vocab_[w], static_cast<int>(w));
  }

  int topics() const { return topics_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }

  double phi(int k, int w) const { return topic_word_[static_cast<std::size_t>(k) * vocab_.size() + w]; }

  int word_id(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? -1 : it->second;
  }

  /// In-vocabulary ids of the tokens and of adjacent-token bigrams.
  std::vector<int> encode(const text::Tokens& toks) const {
    std::vector<int> ids;
    for (auto& t : toks)
      if (int id = word_id(t); id >= 0) ids.push_back(id);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i)
      if (int id = word_id(toks[i] + " " + toks[i + 1]); id >= 0) ids.push_back(id);
    return ids;
  }

  void save(const std::string& path) const {
    io::BinaryWriter w(path, io::ArtifactKind::kTopicModel);
    w.i32(topics_);
    w.f64(alpha_);
    w.f64(beta_);
    w.strs(vocab_);
    w.f64s(topic_word_);
    w.close();
  }

  static TopicModel load(const std::string& path) {
    io::BinaryReader r(path, io::ArtifactKind::kTopicModel);
    const int k = r.i32();
    const double a = r.f64(), b = r.f64();
    auto vocab = r.strs();
    auto tw = r.f64s();
    if (k < 1 || tw.size() != static_cast<std::size_t>(k) * vocab.size())
      throw InputError(path + ": inconsistent topic model");
    return TopicModel(k, a, b, std::move(vocab), std::move(tw));
  }

 private:
  int topics_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<std::string> vocab_;
  std::vector<double> topic_word_;  // K x V, row-major
  std::unordered_map<std::string, int> index_;
};

/// Words kept for topic modeling: document frequency >= min_df and <= max_fraction of documents.
inline std::vector<std::string> prune_vocabulary(const std::vector<text::Tokens>& docs, long long min_df,
                                                 double max_fraction) {
  std::unordered_map<std::string, long long> df;
  for (auto& d : docs) {
    std::unordered_set<std::string> seen(d.begin(), d.end());
    for (auto& w : seen) ++df[w];
  }
  const double cap = max_fraction * static_cast<double>(docs.size());
  std::vector<std::string> vocab;
  for (auto& [w, n] : df)
    if (n >= min_df && static_cast<double>(n) <= cap) vocab.push_back(w);
  std::sort(vocab.begin(), vocab.end());
  return vocab;
}

/// Collapsed Gibbs sampling. Frequent bigrams are appended to the documents before
/// vocabulary pruning, following the token pipeline settings.
inline TopicModel train_lda(std::vector<text::Tokens> docs, const LdaConfig& cfg, const text::TokenPipelineConfig& pipe) {
  if (cfg.topics < 1) throw InputError("topic count must be >= 1");
  if (cfg.beta <= 0.0) throw InputError("beta must be > 0");
  if (docs.empty()) throw InputError("empty corpus for topic model");
  text::add_frequent_bigrams(docs, pipe.bigram_min_count);
  auto vocab = prune_vocabulary(docs, pipe.min_token_df, pipe.max_doc_fraction);
  if (vocab.empty()) throw InputError("empty vocabulary after pruning");

  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], static_cast<int>(i));
  std::vector<std::vector<int>> words;
  for (auto& d : docs) {
    std::vector<int> ids;
    for (auto& t : d)
      if (auto it = index.find(t); it != index.end()) ids.push_back(it->second);
    if (!ids.empty()) words.push_back(std::move(ids));
  }

  const int K = cfg.topics;
  const auto V = vocab.size();
  const double alpha = cfg.effective_alpha(), beta = cfg.beta, vbeta = beta * static_cast<double>(V);
  std::vector<int> n_kw(static_cast<std::size_t>(K) * V, 0), n_k(K, 0);
  std::vector<std::vector<int>> n_dk(words.size(), std::vector<int>(K, 0));
  std::vector<std::vector<int>> z(words.size());
  Rng rng(cfg.seed);
  for (std::size_t d = 0; d < words.size(); ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      const int k = static_cast<int>(uniform_index(rng, K));
      z[d][i] = k;
      ++n_dk[d][k];
      ++n_kw[static_cast<std::size_t>(k) * V + words[d][i]];
      ++n_k[k];
    }
  }
  std::vector<double> p(K);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t d = 0; d < words.size(); ++d) {
      auto& nd = n_dk[d];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const int w = words[d][i];
        int k = z[d][i];
        --nd[k];
        --n_kw[static_cast<std::size_t>(k) * V + w];
        --n_k[k];
        double total = 0.0;
        for (int t = 0; t < K; ++t) {
          total += (nd[t] + alpha) * (n_kw[static_cast<std::size_t>(t) * V + w] + beta) / (n_k[t] + vbeta);
          p[t] = total;
        }
        const double u = uniform01(rng) * total;
        k = static_cast<int>(std::upper_bound(p.begin(), p.end(), u) - p.begin());
        if (k >= K) k = K - 1;
        z[d][i] = k;
        ++nd[k];
        ++n_kw[static_cast<std::size_t>(k) * V + w];
        ++n_k[k];
      }
    }
  }

  std::vector<double> topic_word(static_cast<std::size_t>(K) * V);
  for (int k = 0; k < K; ++k)
    for (std::size_t w = 0; w < V; ++w)
      topic_word[static_cast<std::size_t>(k) * V + w] = (n_kw[static_cast<std::size_t>(k) * V + w] + beta) / (n_k[k] + vbeta);
  return TopicModel(K, alpha, beta, std::move(vocab), std::move(topic_word));
}

/// Topic mixture of one document under fixed topics, averaged over post-burn-in sweeps.
/// Returns nullopt when the document has no in-vocabulary words.
inline std::optional<std::vector<double>> infer_topics(const TopicModel& model, const std::vector<int>& ids,
                                                       const InferenceConfig& inf, std::uint64_t seed) {
  if (ids.empty()) return std::nullopt;
  const int K = model.topics();
  const double alpha = model.alpha();
  Rng rng(seed);
  std::vector<int> z(ids.size()), n_k(K, 0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    z[i] = static_cast<int>(uniform_index(rng, K));
    ++n_k[z[i]];
  }
  std::vector<double> p(K), theta(K, 0.0);
  const int samples = std::max(1, inf.samples);
  const double denom = static_cast<double>(ids.size()) + K * alpha;
  for (int sweep = 0; sweep < inf.burn_in + samples; ++sweep) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      --n_k[z[i]];
      double total = 0.0;
      for (int t = 0; t < K; ++t) {
        total += (n_k[t] + alpha) * model.phi(t, ids[i]);
        p[t] = total;
      }
      int k = static_cast<int>(std::upper_bound(p.begin(), p.end(), uniform01(rng) * total) - p.begin());
      if (k >= K) k = K - 1;
      z[i] = k;
      ++n_k[k];
    }
    if (sweep >= inf.burn_in)
      for (int t = 0; t < K; ++t) theta[t] += (n_k[t] + alpha) / denom;
  }
  for (auto& x : theta) x /= samples;
  return theta;
}

/// exp(-sum log p(w) / N) over held-out documents, with p(w) = sum_k theta_k phi_kw.
inline double perplexity(const TopicModel& model, const std::vector<text::Tokens>& heldout,
                         const InferenceConfig& inf, std::uint64_t seed) {
  if (heldout.empty()) throw InputError("empty held-out set");
  double log_lik = 0.0;
  std::size_t n_words = 0;
  for (std::size_t d = 0; d < heldout.size(); ++d) {
    const auto ids = model.encode(heldout[d]);
    auto theta = infer_topics(model, ids, inf, derive_seed(seed, d));
    if (!theta) continue;
    for (int w : ids) {
      double p = 0.0;
      for (int k = 0; k < model.topics(); ++k) p += (*theta)[k] * model.phi(k, w);
      log_lik += std::log(p);
    }
    n_words += ids.size();
  }
  if (n_words == 0) throw InputError("no held-out document has in-vocabulary words");
  return std::exp(-log_lik / static_cast<double>(n_words));
}

struct TopicMixture {
  std::vector<double> theta;
  bool fallback = false;  // no in-vocabulary tokens; theta is uniform
};

/// Topic mixture of a neighborhood's concatenated tweets.
inline TopicMixture topic_distribution(const TopicModel& model, const std::vector<text::Tokens>& tweets,
                                       const InferenceConfig& inf, std::uint64_t seed) {
  std::vector<int> ids;
  for (auto& t : tweets) {
    auto e = model.encode(t);
    ids.insert(ids.end(), e.begin(), e.end());
  }
  if (auto theta = infer_topics(model, ids, inf, seed)) return {std::move(*theta), false};
  return {std::vector<double>(model.topics(), 1.0 / model.topics()), true};
}

struct RpcCurve {
  std::vector<int> topic_counts;
  std::vector<double> perplexities;
  std::vector<double> rpc;  // rpc[i-1] = |(P_i - P_{i-1}) / (t_i - t_{i-1})| for i >= 1
};

/// Rate-of-perplexity-change model selection. The winning count is the right endpoint of
/// the steepest segment; ties go to the smaller count.
inline std::pair<int, RpcCurve> rpc_select(const std::vector<int>& counts, const std::function<double(int)>& perplexity_fn) {
  if (counts.size() < 2) throw InputError("rpc_select needs at least two topic counts");
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] <= counts[i - 1]) throw InputError("topic counts must be strictly increasing");
  RpcCurve curve;
  curve.topic_counts = counts;
  for (int t : counts) {
    const double p = perplexity_fn(t);
    if (!(p > 0.0) || !std::isfinite(p)) throw Error("perplexity must be positive and finite");
    curve.perplexities.push_back(p);
  }
  std::size_t best = 1;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    curve.rpc.push_back(std::abs((curve.perplexities[i] - curve.perplexities[i - 1]) /
                                 static_cast<double>(counts[i] - counts[i - 1])));
    if (curve.rpc.back() > curve.rpc[best - 1]) best = i;
  }
  return {counts[best], std::move(curve)};
}

}  // namespace cerank::features
