#include <gtest/gtest.h>

#include <cmath>

#include "csnorm/resources.hpp"
#include "csnorm/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace csnorm;

TEST(NGram, HandCounts) {
  auto m = build_ngrams("a b a\n");
  EXPECT_EQ(m.count("a"), 2u);
  EXPECT_EQ(m.count("a", "b"), 1u);
  EXPECT_EQ(m.count("b", "a"), 1u);
  EXPECT_EQ(m.count("<s>", "a"), 1u);
  EXPECT_EQ(m.total_tokens(), 4u);  // three words plus one boundary
}

TEST(NGram, DuplicateLinesCountedOnce) {
  auto m = build_ngrams("a b\na b\n  a   b \nb a\n");
  EXPECT_EQ(m.count("a"), 2u);
  EXPECT_EQ(m.count("a", "b"), 1u);
  EXPECT_THROW(build_ngrams("\n \n"), InvalidArgument);
  EXPECT_THROW(build_ngrams("a", 0.0), InvalidArgument);
}

TEST(NGram, ClosedFormSmoothing) {
  const double alpha = 0.5;
  auto m = build_ngrams("w\n", alpha);
  // vocabulary {w, <s>}, total 2
  const double slots = alpha * 3;
  EXPECT_DOUBLE_EQ(m.logprob("w"), std::log((1 + alpha) / (2 + slots)));
  EXPECT_DOUBLE_EQ(m.logprob("zzz"), std::log(alpha / (2 + slots)));
  EXPECT_DOUBLE_EQ(m.logprob("w", "<s>"), std::log((1 + alpha) / (1 + slots)));
}

TEST(NGram, UnseenBelowSeen) {
  synth::SyntheticWorld w(2);
  auto m = build_ngrams(w.raw_text(0));
  const double unseen = m.logprob("qqqq");
  for (const auto& v : m.vocabulary()) EXPECT_LT(unseen, m.logprob(v));
}

TEST(NGram, DistributionsSumToOne) {
  synth::SyntheticWorld w(4);
  auto m = build_ngrams(w.raw_text(1), 0.7);
  auto total = [&](std::optional<std::string_view> prev) {
    double s = std::exp(m.logprob("__unknown__", prev));
    for (const auto& v : m.vocabulary()) s += std::exp(m.logprob(v, prev));
    return s;
  };
  EXPECT_NEAR(total(std::nullopt), 1.0, 1e-9);
  for (std::size_t i = 0; i < m.vocabulary().size(); i += 7) EXPECT_NEAR(total(m.vocabulary()[i]), 1.0, 1e-9);
  EXPECT_NEAR(total(std::string_view("never-seen-context")), 1.0, 1e-9);
}

TEST(Lexicon, WithinDistanceMatchesScan) {
  Rng rng(12);
  const std::u32string alphabet = U"abcış";
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::string> words;
    for (int i = 0; i < 40; ++i) {
      std::u32string w;
      for (std::size_t k = 0, n = 1 + rng.below(7); k < n; ++k) w += alphabet[rng.below(alphabet.size())];
      words.push_back(unicode::from_code_points(w));
    }
    Lexicon lex("TR", words);
    for (int q = 0; q < 10; ++q) {
      std::u32string query;
      for (std::size_t k = 0, n = 1 + rng.below(12); k < n; ++k) query += alphabet[rng.below(alphabet.size())];
      const auto qs = unicode::from_code_points(query);
      for (std::size_t d : {1u, 2u}) EXPECT_EQ(lex.within_distance(qs, d), oracle::lexicon_scan(words, qs, d));
    }
  }
}

TEST(Lexicon, FromText) {
  auto lex = Lexicon::from_text("DE", "Haus\nhaus\n\n  Haus \ntwo words\n");
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_TRUE(lex.contains("Haus"));
  EXPECT_FALSE(lex.contains("HAUS"));
}

TEST(Embeddings, KnnExamples) {
  auto s = load_embeddings("3 2\na 1 0\nb 1 0\nc 0 1\n");
  auto n = knn(s, "a", 1);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].first, "b");
  EXPECT_NEAR(n[0].second, 1.0, 1e-12);
  EXPECT_TRUE(knn(s, "missing", 5).empty());
  EXPECT_THROW(load_embeddings("a 1 0\nb 1\n"), FormatError);
  EXPECT_THROW(load_embeddings("a 1 x\n"), FormatError);
}

TEST(Embeddings, KnnMatchesBruteForce) {
  Rng rng(21);
  EmbeddingStore s;
  std::vector<std::vector<double>> vecs;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.uniform() - 0.5;
    vecs.push_back(v);
    s.add("w" + std::to_string(i), v);
  }
  auto cos = [&](int a, int b) {
    double d = 0, na = 0, nb = 0;
    for (int k = 0; k < 8; ++k) {
      d += vecs[a][k] * vecs[b][k];
      na += vecs[a][k] * vecs[a][k];
      nb += vecs[b][k] * vecs[b][k];
    }
    return d / std::sqrt(na * nb);
  };
  for (int q = 0; q < 100; q += 9) {
    std::vector<std::pair<double, std::string>> ref;
    for (int i = 0; i < 100; ++i)
      if (i != q) ref.emplace_back(cos(q, i), "w" + std::to_string(i));
    std::sort(ref.begin(), ref.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    auto got = s.knn("w" + std::to_string(q), 10);
    ASSERT_EQ(got.size(), 10u);
    for (int k = 0; k < 10; ++k) {
      EXPECT_EQ(got[k].first, ref[k].second);
      // vectors are stored as float32
      EXPECT_NEAR(got[k].second, ref[k].first, 1e-6);
      if (k) EXPECT_GE(got[k - 1].second, got[k].second);
    }
  }
}

TEST(ReplacementDict, MfrRules) {
  ReplacementDict d;
  d.add("ak", "aku", 2);
  d.add("ak", "ak", 1);
  EXPECT_EQ(mfr_lookup(d, "ak"), "aku");
  EXPECT_EQ(mfr_lookup(d, "zzz"), "zzz");
  d.add("ak", "ak", 1);
  EXPECT_EQ(mfr_lookup(d, "ak"), "ak");  // tie keeps the original
  d.add("x", "z");
  d.add("x", "y");
  EXPECT_EQ(mfr_lookup(d, "x"), "y");  // tie without the original: smallest
  const auto& list = d.lookup("ak");
  EXPECT_EQ(list[0].norm, "ak");
  EXPECT_EQ(list[1].norm, "aku");
}

TEST(ReplacementDict, BuiltFromDatasetIsDeterministic) {
  synth::SyntheticWorld w(6);
  auto d = w.corpus(50);
  auto a = build_replacement_dict(d), b = build_replacement_dict(d);
  EXPECT_EQ(a, b);
  for (const auto& [orig, list] : a.entries()) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      EXPECT_GE(list[i].count, 1u);
      EXPECT_NE(list[i].norm, std::string(kMergeMarker));
      if (i) EXPECT_TRUE(list[i - 1].count > list[i].count ||
                         (list[i - 1].count == list[i].count && list[i - 1].norm < list[i].norm));
    }
  }
}

TEST(Bundle, SerializeRoundTripAndIntegrity) {
  synth::SyntheticWorld w(9);
  auto r = w.resources(0);
  auto bytes = r.serialize();
  auto back = LanguageResources::deserialize(bytes);
  EXPECT_EQ(back.language, r.language);
  EXPECT_EQ(back.lexicon, r.lexicon);
  EXPECT_EQ(back.ngrams, r.ngrams);
  EXPECT_EQ(back.embeddings, r.embeddings);
  EXPECT_EQ(back.serialize(), bytes);

  auto bad = bytes;
  bad[bad.size() / 2] ^= 0x01;
  EXPECT_THROW(LanguageResources::deserialize(bad), IntegrityError);
  EXPECT_THROW(LanguageResources::deserialize(bytes.substr(0, 20)), IntegrityError);
}
