#include <gtest/gtest.h>

#include "csnorm/align.hpp"
#include "csnorm/eval.hpp"
#include "support/oracles.hpp"

using namespace csnorm;

TEST(Metrics, PrecisionRecallTenTokens) {
  // four tokens need a change; the system changes four, two of them correctly
  TokenTable orig{{"a", "b", "c", "d", "e"}, {"f", "g", "h", "i", "j"}};
  TokenTable gold{{"A", "B", "c", "d", "e"}, {"F", "G", "h", "i", "j"}};
  TokenTable pred{{"A", "x", "c", "d", "e"}, {"F", "g", "h", "i", "y"}};
  auto pr = precision_recall(gold, orig, pred);
  EXPECT_EQ(pr.needed, 4u);
  EXPECT_EQ(pr.changed, 4u);
  EXPECT_EQ(pr.true_positives, 2u);
  EXPECT_DOUBLE_EQ(pr.precision, 50.0);
  EXPECT_DOUBLE_EQ(pr.recall, 50.0);
  EXPECT_DOUBLE_EQ(accuracy(gold, pred), 70.0);
  EXPECT_DOUBLE_EQ(accuracy(gold, orig), 60.0);

  auto none = precision_recall(orig, orig, orig);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(accuracy(TokenTable{}, TokenTable{}), 100.0);
  EXPECT_THROW(accuracy(gold, TokenTable{{"a"}}), InvalidArgument);
}

TEST(Metrics, MatchOraclesOnRandomCorpora) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = oracle::random_corpus(rng);
    auto flat = oracle::flatten(c.gold, c.orig, c.pred, c.lids);
    EXPECT_EQ(accuracy(c.gold, c.pred), oracle::accuracy(flat));
    auto pr = precision_recall(c.gold, c.orig, c.pred);
    auto [p, r] = oracle::precision_recall(flat);
    EXPECT_EQ(pr.precision, p);
    EXPECT_EQ(pr.recall, r);
  }
}

TEST(Metrics, ErrorReductionRate) {
  EXPECT_NEAR(err(0.9484, 0.7324), 80.72, 0.01);
  EXPECT_DOUBLE_EQ(err(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(err(1.0, 0.5), 100.0);
  EXPECT_LT(err(0.4, 0.5), 0.0);
  EXPECT_THROW(err(1.0, 1.0), InvalidArgument);

  Dataset perfect;
  perfect.sentences.push_back({{{"a", "a", std::nullopt, std::nullopt}}});
  auto rep = evaluate_normalization(perfect, TokenTable{{"a"}});
  EXPECT_FALSE(rep.err);
  EXPECT_EQ(rep.accuracy, 100.0);
}

TEST(Bootstrap, ExtremesAndOracle) {
  TokenTable gold, good, bad;
  for (int i = 0; i < 25; ++i) {
    gold.push_back({"x" + std::to_string(i), "y"});
    good.push_back(gold.back());
    bad.push_back({"wrong", "y"});
  }
  EXPECT_DOUBLE_EQ(paired_bootstrap(gold, good, bad, 1000, 1), 1.0 / 1001);
  EXPECT_DOUBLE_EQ(paired_bootstrap(gold, bad, good, 1000, 1), 1.0);
  EXPECT_DOUBLE_EQ(paired_bootstrap(gold, good, good, 1000, 1), 1.0);

  // mixed systems against a direct resample-and-score loop
  Rng pick(4);
  TokenTable a, b;
  for (const auto& s : gold) {
    a.push_back(pick.below(3) ? s : std::vector<std::string>{"no", "y"});
    b.push_back(pick.below(2) ? s : std::vector<std::string>{"no", "no"});
  }
  const std::size_t samples = 500;
  Rng rng(9);
  std::size_t not_better = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    TokenTable g, pa, pb;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      auto j = rng.below(gold.size());
      g.push_back(gold[j]);
      pa.push_back(a[j]);
      pb.push_back(b[j]);
    }
    if (accuracy(g, pa) - accuracy(g, pb) <= 0) ++not_better;
  }
  const double p = paired_bootstrap(gold, a, b, samples, 9);
  EXPECT_DOUBLE_EQ(p, static_cast<double>(1 + not_better) / (1 + samples));
  EXPECT_EQ(p, paired_bootstrap(gold, a, b, samples, 9));
}

TEST(Breakdown, WeightedRecombinationGivesOverall) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = oracle::random_corpus(rng);
    auto parts = per_language_breakdown(c.gold, c.pred, c.lids);
    std::size_t n = 0;
    double weighted = 0;
    for (const auto& [label, a] : parts) {
      n += a.tokens;
      weighted += a.accuracy * static_cast<double>(a.tokens);
    }
    if (n == 0) continue;
    EXPECT_NEAR(weighted / static_cast<double>(n), accuracy(c.gold, c.pred), 1e-9);
  }
}

TEST(PosScoring, OracleNeverBelowFirstTag) {
  std::vector<std::string> gold{"NOUN", "VERB", "PUNCT"};
  std::vector<AlignmentLink> links{{0, 1, 0, 2, LinkKind::one_to_many}, {1, 3, 2, 3, LinkKind::many_to_one}};
  std::vector<std::string> tags{"ADP", "NOUN", "VERB"};
  EXPECT_DOUBLE_EQ(pos_eval_oracle(gold, links, tags), 100.0 - 100.0 / 3);
  EXPECT_DOUBLE_EQ(pos_eval_first(gold, links, tags), 100.0 - 200.0 / 3);

  Rng rng(2);
  const char* tagset[] = {"A", "B", "C"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> src(1 + rng.below(5)), tgt(1 + rng.below(5));
    for (auto& s : src) s = std::string(1, static_cast<char>('a' + rng.below(3)));
    for (auto& s : tgt) s = std::string(1, static_cast<char>('a' + rng.below(3)));
    auto l = align_tokens(src, tgt);
    std::vector<std::string> g(src.size()), p(tgt.size());
    for (auto& x : g) x = tagset[rng.below(3)];
    for (auto& x : p) x = tagset[rng.below(3)];
    EXPECT_GE(pos_eval_oracle(g, l, p), pos_eval_first(g, l, p));
  }
  std::vector<AlignmentLink> gap{{0, 1, 0, 1, LinkKind::one_to_one}};
  EXPECT_THROW(pos_eval_oracle(gold, gap, tags), InvalidArgument);
}

TEST(Confusion, CountsAndRows) {
  std::vector<std::string> g{"TR", "TR", "DE", "UN"}, p{"TR", "DE", "DE", "TR"};
  auto m = confusion_matrix(g, p);
  EXPECT_EQ(m.labels, (std::vector<std::string>{"DE", "TR", "UN"}));
  EXPECT_EQ(m.at("TR", "DE"), 1u);
  EXPECT_EQ(m.at("UN", "TR"), 1u);
  EXPECT_EQ(m.at("UN", "UN"), 0u);
  EXPECT_EQ(m.at("XX", "TR"), 0u);
  EXPECT_EQ(m.to_tsv(), "gold\\pred\tDE\tTR\tUN\nDE\t1\t0\t0\nTR\t1\t1\t0\nUN\t0\t1\t0\n");

  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = oracle::random_corpus(rng);
    auto cm = confusion_matrix(c.lids, c.lids);
    std::vector<std::string> gl, pl;
    for (std::size_t i = 0; i < c.gold.size(); ++i) {
      gl.insert(gl.end(), c.gold[i].begin(), c.gold[i].end());
      pl.insert(pl.end(), c.pred[i].begin(), c.pred[i].end());
    }
    auto m2 = confusion_matrix(c.gold, c.pred);
    auto ref = oracle::confusion(gl, pl);
    for (const auto& [key, n] : ref) EXPECT_EQ(m2.at(key.first, key.second), n);
    std::map<std::string, std::size_t> gold_count;
    for (const auto& x : gl) ++gold_count[x];
    for (std::size_t r = 0; r < m2.labels.size(); ++r) {
      std::size_t sum = 0;
      for (auto v : m2.counts[r]) sum += v;
      EXPECT_EQ(sum, gold_count[m2.labels[r]]);
    }
    for (std::size_t r = 0; r < cm.labels.size(); ++r)
      for (std::size_t k = 0; k < cm.labels.size(); ++k)
        if (r != k) EXPECT_EQ(cm.counts[r][k], 0u);
  }
}
