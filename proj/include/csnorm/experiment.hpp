#pragma once

// K-fold normalization experiments with LAI and MFR baselines.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csnorm/config.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/eval.hpp"
#include "csnorm/lid.hpp"
#include "csnorm/ranker.hpp"
#include "csnorm/seqlab.hpp"

namespace csnorm {

inline ResourceSet load_resource_set(const std::map<std::string, std::string>& paths) {
  ResourceSet set;
  for (const auto& [lang, path] : paths) {
    auto h = load_resource_handle(path);
    if (h.bundle->language != lang)
      throw InvalidArgument("resource bundle " + path + " is for language " + h.bundle->language + ", not " + lang);
    set[lang] = std::move(h);
  }
  return set;
}

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_sentences = 0, test_sentences = 0, test_tokens = 0;
  double accuracy = 0, lai = 0, mfr = 0;
  PrecisionRecall pr;
  std::optional<double> lid_accuracy;  // predicted-LID mode only
};

struct CvResult {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0, mean_lai = 0, mean_mfr = 0;
  TokenTable predictions;  // system output, in corpus order
  TokenTable mfr_predictions;
};

// Gold LID labels in coarse form, or nothing when the corpus has none.
inline std::optional<TokenTable> gold_lids(const Dataset& d) {
  if (!d.has_lid()) return std::nullopt;
  return lid_table(d);
}

// Runs one train/test round. In predicted mode a LID tagger is trained on
// the training part and its labels replace the gold ones on the test part.
inline FoldResult run_fold(const Dataset& train, const Dataset& test, const ResourceSet& resources, const Config& cfg,
                           TokenTable* predictions = nullptr, TokenTable* mfr_predictions = nullptr) {
  FoldResult r;
  r.train_sentences = train.sentences.size();
  r.test_sentences = test.sentences.size();
  r.test_tokens = test.token_count();

  std::optional<TokenTable> train_lids, test_lids;
  if (needs_lid(cfg.ranker.strategy)) {
    train_lids = gold_lids(train);
    test_lids = gold_lids(test);
    if (!train_lids || !test_lids) throw InvalidArgument(std::string(to_string(cfg.ranker.strategy)) + " needs LID labels");
    if (cfg.lid_mode == LidMode::predicted) {
      auto lid_model = train_lid(with_lid(train, *train_lids), cfg.lid);
      auto predicted = tag_lid(lid_model, test);
      std::size_t n = 0, ok = 0;
      for (std::size_t i = 0; i < predicted.size(); ++i)
        for (std::size_t j = 0; j < predicted[i].size(); ++j, ++n) ok += predicted[i][j] == (*test_lids)[i][j];
      r.lid_accuracy = n ? 100.0 * static_cast<double>(ok) / static_cast<double>(n) : 100.0;
      test_lids = std::move(predicted);
    }
  }

  auto model = train_normalization_model(train, resources, cfg.ranker, train_lids ? &*train_lids : nullptr);
  auto pred = normalize_dataset(model, test, test_lids ? &*test_lids : nullptr, cfg.threads);
  const auto gold = norm_table(test);
  r.accuracy = accuracy(gold, pred);
  r.lai = accuracy(gold, lai(test));
  auto mfr_pred = mfr(build_replacement_dict(train), test);
  r.mfr = accuracy(gold, mfr_pred);
  r.pr = precision_recall(gold, lai(test), pred);
  if (predictions) *predictions = std::move(pred);
  if (mfr_predictions) *mfr_predictions = std::move(mfr_pred);
  return r;
}

inline CvResult cross_validate(const Dataset& data, const ResourceSet& resources, const Config& cfg, std::size_t k) {
  const auto plan = make_folds(data, k, cfg.seed);
  CvResult out;
  out.predictions.resize(data.sentences.size());
  out.mfr_predictions.resize(data.sentences.size());
  for (std::size_t f = 0; f < k; ++f) {
    const auto test_idx = plan.test_indices(f);
    const auto train_idx = plan.train_indices(f);
    TokenTable pred, mfr_pred;
    auto r = run_fold(data.subset(train_idx), data.subset(test_idx), resources, cfg, &pred, &mfr_pred);
    r.fold = f;
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      out.predictions[test_idx[i]] = std::move(pred[i]);
      out.mfr_predictions[test_idx[i]] = std::move(mfr_pred[i]);
    }
    out.folds.push_back(r);
  }
  for (const auto& r : out.folds) {
    out.mean_accuracy += r.accuracy;
    out.mean_lai += r.lai;
    out.mean_mfr += r.mfr;
  }
  const double n = static_cast<double>(out.folds.size());
  out.mean_accuracy /= n;
  out.mean_lai /= n;
  out.mean_mfr /= n;
  return out;
}

}  // namespace csnorm
