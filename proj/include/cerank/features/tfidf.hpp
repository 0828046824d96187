#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/text.hpp"

namespace cerank::features {

/// One neighborhood's text: the token sequence of each of its tweets. Tweet boundaries
/// are kept so bigrams never straddle two tweets.
using NeighborhoodDoc = std::vector<text::Tokens>;

struct CrimeVocabulary {
  std::vector<std::string> terms;  // lexicon surface forms, most frequent first
  std::vector<std::string> keys;   // normalized match keys aligned with terms
  std::vector<double> idf;         // aligned with terms

  std::size_t size() const { return terms.size(); }
};

namespace detail {

// Unigrams followed by bigrams of every tweet, i.e. the candidate term stream.
template <typename Fn>
void for_each_term(const NeighborhoodDoc& doc, Fn&& fn) {
  for (const auto& tweet : doc) {
    for (const auto& tok : tweet) fn(tok);
    for (std::size_t i = 0; i + 1 < tweet.size(); ++i) fn(tweet[i] + " " + tweet[i + 1]);
  }
}

}  // namespace detail

/// Normalizes a lexicon entry the same way tweet text is normalized. Entries that
/// reduce to nothing, or to more than two words, cannot match and return "".
inline std::string lexicon_key(const std::string& term, const text::Tokenizer& tok) {
  text::Tokens words;
  for (auto& w : text::plain_tokens(term))
    if (!tok.is_stopword(w)) words.push_back(tok.normalize_word(w));
  if (words.empty() || words.size() > 2) return {};
  return text::join(words);
}

/// Top `max_terms` lexicon terms by training-corpus frequency (ties lexicographic), with
/// smoothed idf over the neighborhood documents: ln((1+N)/(1+df)) + 1.
inline CrimeVocabulary build_crime_vocabulary(const std::vector<NeighborhoodDoc>& docs,
                                              const std::vector<std::string>& lexicon,
                                              const text::Tokenizer& tokenizer, std::size_t max_terms = 100) {
  if (lexicon.empty()) throw InputError("empty crime lexicon");
  // key -> lexicographically smallest surface form producing it
  std::map<std::string, std::string> key_to_term;
  for (const auto& term : lexicon) {
    auto key = lexicon_key(term, tokenizer);
    if (key.empty()) continue;
    auto [it, inserted] = key_to_term.emplace(key, term);
    if (!inserted && term < it->second) it->second = term;
  }
  std::unordered_map<std::string, long long> freq, df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string> seen;
    detail::for_each_term(doc, [&](const std::string& t) {
      if (!key_to_term.count(t)) return;
      ++freq[t];
      if (seen.insert(t).second) ++df[t];
    });
  }
  if (freq.empty()) throw InputError("no lexicon terms in corpus");
  std::vector<std::pair<std::string, long long>> ranked;
  for (auto& [key, f] : freq) ranked.emplace_back(key, f);
  std::sort(ranked.begin(), ranked.end(), [&](auto& a, auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return key_to_term.at(a.first) < key_to_term.at(b.first);
  });
  if (ranked.size() > max_terms) ranked.resize(max_terms);
  CrimeVocabulary vocab;
  const double n_docs = static_cast<double>(docs.size());
  for (auto& [key, f] : ranked) {
    vocab.terms.push_back(key_to_term.at(key));
    vocab.keys.push_back(key);
    vocab.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[key]))) + 1.0);
  }
  return vocab;
}

/// tf * idf over the concatenated neighborhood document, L2-normalized when nonzero.
inline std::vector<double> tfidf_vector(const NeighborhoodDoc& doc, const CrimeVocabulary& vocab) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab.keys.size(); ++i) index.emplace(vocab.keys[i], i);
  std::vector<double> v(vocab.size(), 0.0);
  detail::for_each_term(doc, [&](const std::string& t) {
    if (auto it = index.find(t); it != index.end()) v[it->second] += 1.0;
  });
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= vocab.idf[i];
    norm += v[i] * v[i];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
  }
  return v;
}

}  // namespace cerank::features
