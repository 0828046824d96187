#include <cmath>

#include <gtest/gtest.h>

#include "cerank/features/geo.hpp"
#include "cerank/features/sentiment.hpp"
#include "cerank/features/tfidf.hpp"

namespace cerank::features {
namespace {

NeighborhoodDoc doc(std::initializer_list<text::Tokens> tweets) { return NeighborhoodDoc(tweets); }

TEST(CrimeVocabulary, OrderedByFrequency) {
  const text::Tokenizer tok;
  std::vector<NeighborhoodDoc> docs{doc({{"gun", "gun", "gun", "shoot"}, {"gun", "gun"}}),
                                    doc({{"gun", "gun", "shoot", "shoot"}})};
  auto v = build_crime_vocabulary(docs, {"shooting", "gun", "arson"}, tok);
  EXPECT_EQ(v.terms, (std::vector<std::string>{"gun", "shooting"}));
  EXPECT_EQ(v.keys, (std::vector<std::string>{"gun", "shoot"}));
}

TEST(CrimeVocabulary, IdfFloorForUbiquitousTerm) {
  const text::Tokenizer tok;
  std::vector<NeighborhoodDoc> docs(10, doc({{"gun"}}));
  docs[0] = doc({{"gun", "knife"}});
  auto v = build_crime_vocabulary(docs, {"gun", "knife"}, tok);
  ASSERT_EQ(v.terms.front(), "gun");
  EXPECT_DOUBLE_EQ(v.idf[0], 1.0);
  EXPECT_NEAR(v.idf[1], std::log(11.0 / 2.0) + 1.0, 1e-12);
}

TEST(CrimeVocabulary, TruncatesToMaxTerms) {
  const text::Tokenizer tok;
  std::vector<std::string> lexicon;
  text::Tokens words;
  for (int k = 0; k < 150; ++k) {
    lexicon.push_back("crimeword" + std::to_string(k));
    for (int r = 0; r <= k % 7; ++r) words.push_back("crimeword" + std::to_string(k));
  }
  auto v = build_crime_vocabulary({doc({words})}, lexicon, tok);
  EXPECT_EQ(v.size(), 100u);
  std::set<std::string> unique(v.terms.begin(), v.terms.end());
  EXPECT_EQ(unique.size(), 100u);
}

TEST(CrimeVocabulary, BigramTermsMatchWithinTweetsOnly) {
  const text::Tokenizer tok;
  std::vector<NeighborhoodDoc> docs{doc({{"drive", "thru"}, {"drive"}, {"thru"}}), doc({{"drive"}, {"thru"}})};
  auto v = build_crime_vocabulary(docs, {"drive thru"}, tok);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.keys[0], "drive thru");
  auto x = tfidf_vector(docs[1], v);
  EXPECT_EQ(x[0], 0.0);
}

TEST(CrimeVocabulary, NoLexiconTermsIsAnError) {
  const text::Tokenizer tok;
  try {
    build_crime_vocabulary({doc({{"coffee"}})}, {"gun"}, tok);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "no lexicon terms in corpus");
  }
}

TEST(TfIdf, ZeroAndSingleAxisVectors) {
  CrimeVocabulary v{{"gun", "knife"}, {"gun", "knife"}, {1.0, 1.0}};
  EXPECT_EQ(tfidf_vector(doc({{"coffee"}}), v), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(tfidf_vector(doc({{"gun", "gun"}}), v), (std::vector<double>{1.0, 0.0}));
  auto x = tfidf_vector(doc({{"gun", "knife"}}), v);
  EXPECT_NEAR(x[0], std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(x[1], std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(TfIdf, NormIsZeroOrOne) {
  CrimeVocabulary v{{"a", "b", "c"}, {"a", "b", "c"}, {1.2, 2.5, 1.0}};
  for (auto d : {doc({{"a", "b", "b"}}), doc({{"c"}, {"a", "q"}}), doc({{"q"}})}) {
    double n = 0;
    for (double x : tfidf_vector(d, v)) {
      EXPECT_GE(x, 0.0);
      n += x * x;
    }
    EXPECT_TRUE(n == 0.0 || std::abs(std::sqrt(n) - 1.0) < 1e-9);
  }
}

LexiconScorer fixed(double s) { return LexiconScorer({{"w", s}}); }

TEST(Sentiment, SingleBinMass) {
  auto s = fixed(0.9);
  EXPECT_EQ(sentiment_distribution({"w", "w w"}, {&s}), (std::array<double, 4>{0, 0, 0, 1}));
}

TEST(Sentiment, UndeterminedTweetsDilute) {
  auto s = fixed(0.9);
  auto d = sentiment_distribution({"w", "w", "nothing"}, {&s});
  EXPECT_DOUBLE_EQ(d[3], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(d[0] + d[1] + d[2] + d[3], 2.0 / 3.0);
}

TEST(Sentiment, CancellingScorersAreUndetermined) {
  auto a = fixed(0.5), b = fixed(-0.5), c = fixed(0.0);
  EXPECT_EQ(combined_sentiment("w", {&a, &b, &c}), 0.0);
  EXPECT_EQ(sentiment_distribution({"w"}, {&a, &b, &c}), (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(Sentiment, MeanOfNonzeroScorers) {
  auto a = fixed(0.6), b = fixed(0.0), c = fixed(0.2);
  EXPECT_DOUBLE_EQ(combined_sentiment("w", {&a, &b, &c}), 0.4);
}

TEST(Sentiment, BinEdges) {
  EXPECT_EQ(sentiment_bin(-1.0), 0);
  EXPECT_EQ(sentiment_bin(-0.5), 0);
  EXPECT_EQ(sentiment_bin(-0.49), 1);
  EXPECT_EQ(sentiment_bin(0.01), 2);
  EXPECT_EQ(sentiment_bin(0.5), 2);
  EXPECT_EQ(sentiment_bin(0.51), 3);
}

TEST(Sentiment, ErrorsAndRanges) {
  EXPECT_THROW(sentiment_distribution({"w"}, {}), InputError);
  EXPECT_THROW(LexiconScorer({{"w", 1.5}}), InputError);
  LexiconScorer lex({{"good", 0.8}, {"bad", -0.4}, {"awful", -1.0}});
  auto d = sentiment_distribution({"good day", "bad awful", "good bad", "meh"}, {&lex});
  double sum = 0;
  for (double x : d) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    sum += x;
  }
  EXPECT_LE(sum, 1.0);
  EXPECT_DOUBLE_EQ(d[0], 0.25);
  EXPECT_DOUBLE_EQ(d[2], 0.25);
  EXPECT_DOUBLE_EQ(d[3], 0.25);
}

TEST(Haversine, ClosedForms) {
  EXPECT_EQ(haversine_km({0, 0}, {0, 0}), 0.0);
  EXPECT_NEAR(haversine_km({0, 0}, {0, 1}), 111.1949, 0.01);
  EXPECT_NEAR(haversine_km({0, 0}, {0, 1}), 2 * M_PI * kEarthRadiusKm / 360.0, 1e-9);
  EXPECT_NEAR(haversine_km({90, 0}, {-90, 0}), M_PI * kEarthRadiusKm, 1e-6);
  EXPECT_DOUBLE_EQ(haversine_km({39.9, -83.0}, {40.1, -82.9}), haversine_km({40.1, -82.9}, {39.9, -83.0}));
}

TEST(Haversine, TriangleInequality) {
  Rng rng(17);
  auto pt = [&] { return corpus::LatLon{180.0 * uniform01(rng) - 90.0, 360.0 * uniform01(rng) - 180.0}; };
  for (int k = 0; k < 2000; ++k) {
    const auto a = pt(), b = pt(), c = pt();
    EXPECT_LE(haversine_km(a, c), haversine_km(a, b) + haversine_km(b, c) + 1e-6);
  }
}

}  // namespace
}  // namespace cerank::features
