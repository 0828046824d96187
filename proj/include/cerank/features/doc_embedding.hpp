#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/io.hpp"
#include "cerank/text.hpp"

namespace cerank::features {

struct EmbedderConfig {
  int dim = 50;
  int epochs = 20;
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;
  int negatives = 5;
  long long min_count = 2;
  int infer_epochs = 50;
  std::uint64_t seed = 1;
};

namespace detail {

inline double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace detail

/// Paragraph-vector model trained as distributed bag of words with negative sampling.
/// Holds the output word vectors; document vectors are produced by inference.
class DocEmbedder {
 public:
  DocEmbedder() = default;

  DocEmbedder(int dim, std::vector<std::string> vocab, std::vector<long long> counts, std::vector<double> word_vectors,
              const EmbedderConfig& cfg)
      : dim_(dim), vocab_(std::move(vocab)), counts_(std::move(counts)), word_vectors_(std::move(word_vectors)), cfg_(cfg) {
    if (dim_ < 1) throw Error("embedding dimension must be >= 1");
    if (word_vectors_.size() != vocab_.size() * static_cast<std::size_t>(dim_) || counts_.size() != vocab_.size())
      throw Error("word vectors do not match vocabulary");
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], static_cast<int>(i));
    build_noise();
  }

  int dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<double>& word_vectors() const { return word_vectors_; }
  const EmbedderConfig& config() const { return cfg_; }

  std::vector<int> encode(const text::Tokens& toks) const {
    std::vector<int> ids;
    for (auto& t : toks)
      if (auto it = index_.find(t); it != index_.end()) ids.push_back(it->second);
    return ids;
  }

  /// Trains a fresh document vector against the frozen word vectors.
  std::vector<double> infer(const std::vector<int>& ids, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> doc(dim_);
    for (auto& x : doc) x = (uniform01(rng) - 0.5) / dim_;
    if (ids.empty()) return doc;
    const double total = static_cast<double>(cfg_.infer_epochs) * static_cast<double>(ids.size());
    double done = 0.0;
    std::vector<double> grad(dim_);
    for (int epoch = 0; epoch < cfg_.infer_epochs; ++epoch) {
      for (int w : ids) {
        const double lr = std::max(cfg_.min_learning_rate, cfg_.learning_rate * (1.0 - done / total));
        done += 1.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int s = 0; s <= cfg_.negatives; ++s) {
          const int target = s == 0 ? w : sample_noise(rng);
          if (s > 0 && target == w) continue;
          const double* out = &word_vectors_[static_cast<std::size_t>(target) * dim_];
          double f = 0.0;
          for (int c = 0; c < dim_; ++c) f += doc[c] * out[c];
          const double g = ((s == 0 ? 1.0 : 0.0) - detail::sigmoid(f)) * lr;
          for (int c = 0; c < dim_; ++c) grad[c] += g * out[c];
        }
        for (int c = 0; c < dim_; ++c) doc[c] += grad[c];
      }
    }
    return doc;
  }

  int sample_noise(Rng& rng) const {
    const double u = uniform01(rng) * noise_cdf_.back();
    auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - noise_cdf_.begin(), static_cast<std::ptrdiff_t>(noise_cdf_.size()) - 1));
  }

  void save(const std::string& path) const {
    io::BinaryWriter w(path, io::ArtifactKind::kDocEmbedder);
    w.i32(dim_);
    w.i32(cfg_.epochs);
    w.f64(cfg_.learning_rate);
    w.f64(cfg_.min_learning_rate);
    w.i32(cfg_.negatives);
    w.u64(static_cast<std::uint64_t>(cfg_.min_count));
    w.i32(cfg_.infer_epochs);
    w.u64(cfg_.seed);
    w.strs(vocab_);
    w.u64(counts_.size());
    for (auto c : counts_) w.u64(static_cast<std::uint64_t>(c));
    w.f64s(word_vectors_);
    w.close();
  }

  static DocEmbedder load(const std::string& path) {
    io::BinaryReader r(path, io::ArtifactKind::kDocEmbedder);
    EmbedderConfig cfg;
    cfg.dim = r.i32();
    cfg.epochs = r.i32();
    cfg.learning_rate = r.f64();
    cfg.min_learning_rate = r.f64();
    cfg.negatives = r.i32();
    cfg.min_count = static_cast<long long>(r.u64());
    cfg.infer_epochs = r.i32();
    cfg.seed = r.u64();
    auto vocab = r.strs();
    std::vector<long long> counts(r.u64());
    for (auto& c : counts) c = static_cast<long long>(r.u64());
    auto vectors = r.f64s();
    if (counts.size() != vocab.size() || vectors.size() != vocab.size() * static_cast<std::size_t>(std::max(cfg.dim, 0)))
      throw InputError(path + ": inconsistent embedder");
    return DocEmbedder(cfg.dim, std::move(vocab), std::move(counts), std::move(vectors), cfg);
  }

 private:
  void build_noise() {
    noise_cdf_.resize(counts_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      acc += std::pow(static_cast<double>(counts_[i]), 0.75);
      noise_cdf_[i] = acc;
    }
  }

  int dim_ = 0;
  std::vector<std::string> vocab_;
  std::vector<long long> counts_;
  std::vector<double> word_vectors_;  // V x dim output weights
  EmbedderConfig cfg_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> noise_cdf_;
};

/// Trains word output vectors jointly with one vector per training document.
/// Single-threaded and fully determined by (docs, cfg).
inline DocEmbedder train_doc_embedder(const std::vector<text::Tokens>& docs, const EmbedderConfig& cfg) {
  if (cfg.dim < 1) throw InputError("embedding dimension must be >= 1");
  if (docs.empty()) throw InputError("empty corpus for document embedding");
  std::unordered_map<std::string, long long> freq;
  for (auto& d : docs)
    for (auto& t : d) ++freq[t];
  std::vector<std::string> vocab;
  for (auto& [w, c] : freq)
    if (c >= cfg.min_count) vocab.push_back(w);
  if (vocab.empty()) throw InputError("empty vocabulary for document embedding");
  std::sort(vocab.begin(), vocab.end());
  std::vector<long long> counts;
  for (auto& w : vocab) counts.push_back(freq[w]);

  const int dim = cfg.dim;
  DocEmbedder shell(dim, vocab, counts, std::vector<double>(vocab.size() * dim, 0.0), cfg);
  std::vector<double> out(vocab.size() * dim, 0.0);
  std::vector<std::vector<int>> encoded;
  std::size_t n_tokens = 0;
  for (auto& d : docs) {
    encoded.push_back(shell.encode(d));
    n_tokens += encoded.back().size();
  }
  Rng rng(cfg.seed);
  std::vector<std::vector<double>> doc_vecs(encoded.size(), std::vector<double>(dim));
  for (auto& v : doc_vecs)
    for (auto& x : v) x = (uniform01(rng) - 0.5) / dim;

  const double total = static_cast<double>(cfg.epochs) * static_cast<double>(std::max<std::size_t>(n_tokens, 1));
  double done = 0.0;
  std::vector<double> grad(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t d = 0; d < encoded.size(); ++d) {
      auto& doc = doc_vecs[d];
      for (int w : encoded[d]) {
        const double lr = std::max(cfg.min_learning_rate, cfg.learning_rate * (1.0 - done / total));
        done += 1.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int s = 0; s <= cfg.negatives; ++s) {
          const int target = s == 0 ? w : shell.sample_noise(rng);
          if (s > 0 && target == w) continue;
          double* o = &out[static_cast<std::size_t>(target) * dim];
          double f = 0.0;
          for (int c = 0; c < dim; ++c) f += doc[c] * o[c];
          const double g = ((s == 0 ? 1.0 : 0.0) - detail::sigmoid(f)) * lr;
          for (int c = 0; c < dim; ++c) {
            grad[c] += g * o[c];
            o[c] += g * doc[c];
          }
        }
        for (int c = 0; c < dim; ++c) doc[c] += grad[c];
      }
    }
  }
  return DocEmbedder(dim, std::move(vocab), std::move(counts), std::move(out), cfg);
}

struct Embedding {
  std::vector<double> vector;
  bool fallback = false;  // no in-vocabulary tokens; vector is zero
};

/// Embeds a neighborhood's concatenated tweets.
inline Embedding embed_neighborhood(const DocEmbedder& emb, const std::vector<text::Tokens>& tweets, std::uint64_t seed) {
  std::vector<int> ids;
  for (auto& t : tweets) {
    auto e = emb.encode(t);
    ids.insert(ids.end(), e.begin(), e.end());
  }
  if (ids.empty()) return {std::vector<double>(emb.dim(), 0.0), true};
  return {emb.infer(ids, seed), false};
}

}  // namespace cerank::features
