#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cerank/features/doc_embedding.hpp"
#include "test_util.hpp"

namespace cerank::features {
namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

EmbedderConfig small_config(int dim = 16) {
  EmbedderConfig c;
  c.dim = dim;
  c.epochs = 15;
  c.min_count = 1;
  c.infer_epochs = 40;
  c.seed = 3;
  return c;
}

TEST(DocEmbedder, RequestedDimension) {
  const auto docs = testing::planted_corpus(4, 12, 40, 25, 1);
  auto cfg = small_config(50);
  cfg.epochs = 3;
  const auto emb = train_doc_embedder(docs, cfg);
  EXPECT_EQ(emb.dim(), 50);
  EXPECT_EQ(emb.word_vectors().size(), emb.vocab_size() * 50);
  for (double x : emb.word_vectors()) ASSERT_TRUE(std::isfinite(x));
  EXPECT_EQ(embed_neighborhood(emb, {docs[0]}, 1).vector.size(), 50u);
}

TEST(DocEmbedder, SeededTrainingAndInferenceAreIdentical) {
  const auto docs = testing::planted_corpus(4, 12, 40, 25, 2);
  const auto a = train_doc_embedder(docs, small_config());
  const auto b = train_doc_embedder(docs, small_config());
  EXPECT_EQ(a.word_vectors(), b.word_vectors());
  EXPECT_EQ(embed_neighborhood(a, {docs[1], docs[2]}, 9).vector, embed_neighborhood(b, {docs[1], docs[2]}, 9).vector);
}

TEST(DocEmbedder, MinCountPrunesRareWords) {
  std::vector<text::Tokens> docs{{"a", "a", "b"}, {"a", "c", "c"}};
  auto cfg = small_config();
  cfg.min_count = 2;
  const auto emb = train_doc_embedder(docs, cfg);
  EXPECT_EQ(emb.vocab_size(), 2u);
  EXPECT_TRUE(emb.encode({"b"}).empty());
  cfg.min_count = 5;
  EXPECT_THROW(train_doc_embedder(docs, cfg), InputError);
}

TEST(DocEmbedder, EmptyNeighborhoodFallsBackToZero) {
  const auto emb = train_doc_embedder(testing::planted_corpus(2, 5, 10, 10, 3), small_config());
  auto e = embed_neighborhood(emb, {}, 1);
  EXPECT_TRUE(e.fallback);
  EXPECT_EQ(e.vector, std::vector<double>(16, 0.0));
  auto oov = embed_neighborhood(emb, {{"unknown", "words"}}, 1);
  EXPECT_TRUE(oov.fallback);
}

// Ten neighborhoods in five duplicated pairs; each pair draws on its own planted topic.
struct DuplicateFixture {
  std::vector<std::vector<text::Tokens>> hoods;
  std::vector<std::vector<double>> vecs;

  DuplicateFixture() {
    const auto tweets = testing::planted_corpus(5, 15, 100, 12, 4);
    for (int h = 0; h < 5; ++h) {
      std::vector<text::Tokens> mine;
      for (std::size_t d = static_cast<std::size_t>(h); d < tweets.size(); d += 5) mine.push_back(tweets[d]);
      hoods.push_back(mine);
      hoods.push_back(mine);
    }
    const auto emb = train_doc_embedder(tweets, small_config());
    for (std::size_t h = 0; h < hoods.size(); ++h) vecs.push_back(embed_neighborhood(emb, hoods[h], derive_seed(11, h)).vector);
  }
};

TEST(DocEmbedder, DuplicatesMoreSimilarThanRandomPairs) {
  DuplicateFixture f;
  double dup = 0, other = 0;
  int n_other = 0;
  for (std::size_t a = 0; a < f.vecs.size(); ++a)
    for (std::size_t b = a + 1; b < f.vecs.size(); ++b) {
      if (a / 2 == b / 2) dup += cosine(f.vecs[a], f.vecs[b]);
      else {
        other += cosine(f.vecs[a], f.vecs[b]);
        ++n_other;
      }
    }
  EXPECT_GT(dup / 5, other / n_other);
}

TEST(DocEmbedder, NearestNeighborIsTheDuplicate) {
  DuplicateFixture f;
  for (std::size_t a = 0; a < f.vecs.size(); ++a) {
    std::size_t best = a;
    double top = -2;
    for (std::size_t b = 0; b < f.vecs.size(); ++b) {
      if (b == a) continue;
      const double c = cosine(f.vecs[a], f.vecs[b]);
      if (c > top) {
        top = c;
        best = b;
      }
    }
    EXPECT_EQ(best, a ^ 1u) << "neighborhood " << a;
  }
}

TEST(DocEmbedder, FileRoundTrip) {
  testing::TempDir dir;
  const auto docs = testing::planted_corpus(3, 8, 20, 10, 5);
  const auto emb = train_doc_embedder(docs, small_config());
  emb.save(dir.file("d2v.bin"));
  const auto back = DocEmbedder::load(dir.file("d2v.bin"));
  EXPECT_EQ(back.dim(), emb.dim());
  EXPECT_EQ(back.word_vectors(), emb.word_vectors());
  EXPECT_EQ(embed_neighborhood(back, {docs[0]}, 4).vector, embed_neighborhood(emb, {docs[0]}, 4).vector);
}

}  // namespace
}  // namespace cerank::features
