#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cerank/common.hpp"
#include "cerank/io.hpp"

namespace cerank::text {

using Tokens = std::vector<std::string>;

namespace detail {

// Decodes one UTF-8 sequence at s[i]; malformed bytes decode as themselves.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> unsigned {
    if (i + k >= s.size()) return 0x100;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : 0x100;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1) < 0x100) {
    char32_t c = ((b0 & 0x1F) << 6) | cont(1);
    i += 2;
    return c;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) < 0x100 && cont(2) < 0x100) {
    char32_t c = ((b0 & 0x0F) << 12) | (cont(1) << 6) | cont(2);
    i += 3;
    return c;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) < 0x100 && cont(2) < 0x100 && cont(3) < 0x100) {
    char32_t c = ((b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3);
    i += 4;
    return c;
  }
  ++i;
  return b0;
}

inline bool is_emoji(char32_t c) {
  return (c >= 0x1F000 && c <= 0x1FAFF) || (c >= 0x2600 && c <= 0x27BF) ||
         (c >= 0x2B00 && c <= 0x2BFF) || (c >= 0x2190 && c <= 0x21FF);
}

// Joiners and modifiers that glue onto a preceding emoji and never stand alone.
inline bool is_emoji_modifier(char32_t c) {
  return c == 0x200D || c == 0xFE0F || c == 0xFE0E || (c >= 0x1F3FB && c <= 0x1F3FF);
}

inline bool is_word_char(char32_t c) {
  if (c < 0x80) return std::isalnum(static_cast<int>(c)) || c == '_';
  return !is_emoji(c) && !is_emoji_modifier(c) && !(c >= 0x2000 && c <= 0x206F) && c != 0xA0;
}

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

}  // namespace detail

using detail::lower_ascii;

/// Light suffix-stripping stemmer: plural forms, then -ing/-ed with undoubling.
/// Words of three letters or fewer, and words with non-letters, pass through unchanged.
inline std::string stem(std::string_view word) {
  std::string w(word);
  if (w.size() <= 3 || !std::all_of(w.begin(), w.end(), detail::is_ascii_alpha)) return w;
  using detail::ends_with;
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies") && w.size() > 4) {
    w.resize(w.size() - 3);
    w.push_back('y');
  } else if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    w.pop_back();
  }
  for (std::string_view suffix : {std::string_view("ing"), std::string_view("ed")}) {
    if (!ends_with(w, suffix) || w.size() < suffix.size() + 3) continue;
    std::string_view base(w.data(), w.size() - suffix.size());
    if (!detail::has_vowel(base)) continue;
    w.resize(base.size());
    const std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == w[n - 2] && !detail::is_vowel(w[n - 1]) && w[n - 1] != 'l' &&
        w[n - 1] != 's' && w[n - 1] != 'z')
      w.pop_back();
    break;
  }
  return w;
}

inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",      "about", "above",  "after", "again", "against", "all",   "am",     "an",
      "and",    "any",   "are",    "as",    "at",    "be",      "been",  "before", "being",
      "below",  "between", "both", "but",   "by",    "can",     "could", "did",    "do",
      "does",   "doing", "don't",  "down",  "during", "each",   "few",   "for",    "from",
      "further", "had",  "has",    "have",  "having", "he",     "her",   "here",   "hers",
      "herself", "him",  "himself", "his",  "how",   "i",       "i'm",   "if",     "in",
      "into",   "is",    "it",     "it's",  "its",   "itself",  "just",  "me",     "more",
      "most",   "my",    "myself", "no",    "nor",   "not",     "now",   "of",     "off",
      "on",     "once",  "only",   "or",    "other", "our",     "ours",  "ourselves", "out",
      "over",   "own",   "rt",     "same",  "she",   "should",  "so",    "some",   "such",
      "than",   "that",  "the",    "their", "theirs", "them",   "themselves", "then", "there",
      "these",  "they",  "this",   "those", "through", "to",    "too",   "under",  "until",
      "up",     "very",  "was",    "we",    "were",  "what",    "when",  "where",  "which",
      "while",  "who",   "whom",   "why",   "will",  "with",    "would", "you",    "your",
      "yours",  "yourself", "yourselves"};
  return words;
}

/// Normalization settings shared by every text-derived feature.
struct TokenPipelineConfig {
  std::string stopword_file;  // empty: built-in English list
  std::string lemma_file;     // optional "form<TAB>lemma" overrides for the stemmer
  long long min_token_df = 20;
  long long bigram_min_count = 20;  // 0 disables bigram tokens
  double max_doc_fraction = 0.5;

  void validate() const {
    if (min_token_df < 0) throw InputError("min_token_df must be >= 0");
    if (bigram_min_count < 0) throw InputError("bigram_min_count must be >= 0");
    if (!(max_doc_fraction > 0.0 && max_doc_fraction <= 1.0))
      throw InputError("max_doc_fraction must be in (0,1]");
  }
};

/// Tweet-aware tokenizer. Hashtags, handles and emoji survive as single tokens;
/// plain words are lowercased, stopword-filtered and stemmed.
class Tokenizer {
 public:
  Tokenizer() : Tokenizer(TokenPipelineConfig{}) {}

  explicit Tokenizer(const TokenPipelineConfig& cfg) {
    cfg.validate();
    if (cfg.stopword_file.empty()) {
      stopwords_.insert(default_stopwords().begin(), default_stopwords().end());
    } else {
      for (auto& line : io::read_lines(cfg.stopword_file))
        if (!line.empty()) stopwords_.insert(lower_ascii(line));
    }
    if (!cfg.lemma_file.empty()) {
      for (auto& line : io::read_lines(cfg.lemma_file)) {
        const auto tab = line.find('\t');
        if (line.empty()) continue;
        if (tab == std::string::npos) throw InputError(cfg.lemma_file + ": expected form<TAB>lemma");
        lemmas_[lower_ascii(line.substr(0, tab))] = lower_ascii(line.substr(tab + 1));
      }
    }
  }

  Tokenizer(std::unordered_set<std::string> stopwords, std::unordered_map<std::string, std::string> lemmas)
      : stopwords_(std::move(stopwords)), lemmas_(std::move(lemmas)) {}

  Tokens tokenize(std::string_view text) const {
    Tokens out;
    for (auto& raw : split_raw(text)) {
      if (raw.kind == Kind::kWord) {
        std::string w = lower_ascii(raw.text);
        if (stopwords_.count(w)) continue;
        out.push_back(normalize_word(w));
      } else if (raw.kind == Kind::kTag) {
        out.push_back(lower_ascii(raw.text));
      } else {
        out.push_back(raw.text);
      }
    }
    return out;
  }

  /// Lemma override if present, else the stemmer. Input must be lowercase.
  std::string normalize_word(const std::string& lower) const {
    if (auto it = lemmas_.find(lower); it != lemmas_.end()) return it->second;
    return stem(lower);
  }

  bool is_stopword(const std::string& lower) const { return stopwords_.count(lower) > 0; }

 private:
  enum class Kind { kWord, kTag, kEmoji };
  struct RawToken {
    std::string text;
    Kind kind;
  };

  static std::vector<RawToken> split_raw(std::string_view s) {
    std::vector<RawToken> out;
    std::size_t i = 0;
    auto starts_url = [&](std::size_t p) {
      auto rest = s.substr(p);
      auto lower = lower_ascii(rest.substr(0, std::min<std::size_t>(8, rest.size())));
      return lower.rfind("http://", 0) == 0 || lower.rfind("https://", 0) == 0 ||
             lower.rfind("www.", 0) == 0;
    };
    while (i < s.size()) {
      if (starts_url(i)) {
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        continue;
      }
      std::size_t next = i;
      const char32_t c = detail::decode_utf8(s, next);
      if ((c == '#' || c == '@') && next < s.size()) {
        std::size_t peek = next;
        if (detail::is_word_char(detail::decode_utf8(s, peek))) {
          std::size_t end = next;
          while (end < s.size()) {
            std::size_t after = end;
            if (!detail::is_word_char(detail::decode_utf8(s, after))) break;
            end = after;
          }
          out.push_back({std::string(s.substr(i, end - i)), Kind::kTag});
          i = end;
          continue;
        }
      }
      if (detail::is_word_char(c)) {
        std::size_t end = next;
        while (end < s.size()) {
          std::size_t after = end;
          const char32_t d = detail::decode_utf8(s, after);
          if (detail::is_word_char(d)) {
            end = after;
            continue;
          }
          // Keep an apostrophe that sits between two word characters.
          if ((d == '\'' || d == 0x2019) && after < s.size()) {
            std::size_t after2 = after;
            if (detail::is_word_char(detail::decode_utf8(s, after2))) {
              end = after;
              continue;
            }
          }
          break;
        }
        std::string word(s.substr(i, end - i));
        // Fold the typographic apostrophe to ASCII.
        for (std::size_t p; (p = word.find("\xE2\x80\x99")) != std::string::npos;) word.replace(p, 3, "'");
        out.push_back({std::move(word), Kind::kWord});
        i = end;
        continue;
      }
      if (detail::is_emoji(c)) {
        std::size_t end = next;
        while (end < s.size()) {
          std::size_t after = end;
          if (!detail::is_emoji_modifier(detail::decode_utf8(s, after))) break;
          end = after;
        }
        out.push_back({std::string(s.substr(i, next - i)), Kind::kEmoji});
        i = end;
        continue;
      }
      i = next;
    }
    return out;
  }

  std::unordered_set<std::string> stopwords_;
  std::unordered_map<std::string, std::string> lemmas_;
};

/// Lowercased alphanumeric runs, no stopword removal or stemming. Used for
/// gazetteer surfaces and lexicon lookups, where matching must be literal.
inline Tokens plain_tokens(std::string_view s) {
  Tokens out;
  std::string cur;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t next = i;
    const char32_t c = detail::decode_utf8(s, next);
    const bool inner_apostrophe = c == '\'' && !cur.empty() && next < s.size() &&
                                  std::isalnum(static_cast<unsigned char>(s[next]));
    if ((c < 0x80 && std::isalnum(static_cast<int>(c))) || inner_apostrophe ||
        (c >= 0x80 && detail::is_word_char(c))) {
      cur.append(s.substr(i, next - i));
    } else if (!cur.empty()) {
      out.push_back(lower_ascii(cur));
      cur.clear();
    }
    i = next;
  }
  if (!cur.empty()) out.push_back(lower_ascii(cur));
  return out;
}

inline std::string join(const Tokens& toks, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out.append(sep);
    out.append(toks[i]);
  }
  return out;
}

/// Adjacent-token bigrams joined with a single space.
inline Tokens bigrams(const Tokens& toks) {
  Tokens out;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) out.push_back(toks[i] + " " + toks[i + 1]);
  return out;
}

/// Appends to each document the bigrams occurring in at least `min_count` documents.
inline void add_frequent_bigrams(std::vector<Tokens>& docs, long long min_count) {
  if (min_count <= 0) return;
  std::unordered_map<std::string, long long> df;
  for (const auto& d : docs) {
    std::unordered_set<std::string> seen;
    for (auto& b : bigrams(d))
      if (seen.insert(b).second) ++df[b];
  }
  for (auto& d : docs) {
    Tokens extra;
    for (auto& b : bigrams(d)) {
      auto it = df.find(b);
      if (it != df.end() && it->second >= min_count) extra.push_back(b);
    }
    d.insert(d.end(), extra.begin(), extra.end());
  }
}

}  // namespace cerank::text
