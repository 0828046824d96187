#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/io.hpp"
#include "cerank/text.hpp"

namespace cerank::features {

/// A sentiment tool normalized to [-1, 1]. Zero means the tool found nothing to score.
class SentimentScorer {
 public:
  virtual ~SentimentScorer() = default;
  virtual double score(std::string_view text) const = 0;
};

/// Mean lexicon score of the matched tokens; 0 when nothing matches.
class LexiconScorer final : public SentimentScorer {
 public:
  explicit LexiconScorer(std::unordered_map<std::string, double> lexicon) : lexicon_(std::move(lexicon)) {
    for (auto& [term, s] : lexicon_)
      if (!(s >= -1.0 && s <= 1.0)) throw InputError("sentiment score out of [-1,1] for '" + term + "'");
  }

  /// Reads term<TAB>score lines.
  static LexiconScorer from_file(const std::string& path) {
    std::unordered_map<std::string, double> lex;
    for (auto& line : io::read_lines(path)) {
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw InputError(path + ": expected term<TAB>score");
      lex[text::lower_ascii(line.substr(0, tab))] = io::parse_double(line.substr(tab + 1), "sentiment score");
    }
    return LexiconScorer(std::move(lex));
  }

  double score(std::string_view text) const override {
    double sum = 0.0;
    int hits = 0;
    for (auto& tok : text::plain_tokens(text)) {
      if (auto it = lexicon_.find(tok); it != lexicon_.end()) {
        sum += it->second;
        ++hits;
      }
    }
    return hits ? sum / hits : 0.0;
  }

 private:
  std::unordered_map<std::string, double> lexicon_;
};

/// Mean of the nonzero scorer outputs; 0 (undetermined) when every scorer abstains.
inline double combined_sentiment(std::string_view text, const std::vector<const SentimentScorer*>& scorers) {
  double sum = 0.0;
  int nonzero = 0;
  for (auto* s : scorers) {
    const double v = s->score(text);
    if (v != 0.0) {
      sum += v;
      ++nonzero;
    }
  }
  return nonzero ? sum / nonzero : 0.0;
}

/// Bin index for a nonzero sentiment: [-1,-0.5], (-0.5,0), (0,0.5], (0.5,1].
inline int sentiment_bin(double s) {
  if (s <= -0.5) return 0;
  if (s < 0.0) return 1;
  if (s <= 0.5) return 2;
  return 3;
}

/// Bin counts over the neighborhood's tweets divided by its total tweet count, so
/// undetermined tweets dilute the distribution.
inline std::array<double, 4> sentiment_distribution(const std::vector<std::string>& tweet_texts,
                                                    const std::vector<const SentimentScorer*>& scorers) {
  if (scorers.empty()) throw InputError("no sentiment scorers");
  std::array<double, 4> dist{};
  if (tweet_texts.empty()) return dist;
  for (auto& t : tweet_texts) {
    const double s = combined_sentiment(t, scorers);
    if (s != 0.0) dist[sentiment_bin(s)] += 1.0;
  }
  for (auto& x : dist) x /= static_cast<double>(tweet_texts.size());
  return dist;
}

}  // namespace cerank::features
