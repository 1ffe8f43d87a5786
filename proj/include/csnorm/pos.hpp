#pragma once

// POS tagging of normalized text. The tagger runs on the normalized words;
// tags come back to the original tokens through the normalization links and
// are scored with the oracle rule (any aligned tag may match).

#include <span>
#include <string>
#include <vector>

#include "csnorm/align.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/eval.hpp"
#include "csnorm/seqlab.hpp"

namespace csnorm {

inline constexpr char kTagJoiner = '+';

// Training sequences from the ORIG and POS columns.
inline std::vector<LabeledSequence> pos_sequences(const Dataset& data) {
  std::vector<LabeledSequence> seqs;
  for (const auto& s : data.sentences) {
    LabeledSequence seq;
    for (const auto& t : s.tokens) {
      if (!t.pos) throw InvalidArgument("token '" + t.orig + "' has no POS tag");
      seq.words.push_back(t.orig);
      seq.labels.push_back(*t.pos);
    }
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

inline LinearSequenceModel train_pos(const Dataset& data, const PerceptronConfig& cfg = {}) {
  auto seqs = pos_sequences(data);
  return PerceptronTrainer::train(seqs, cfg);
}

struct TaggedNormalization {
  OutputAlignment alignment;      // normalized words and token links
  std::vector<std::string> tags;  // one per normalized word
};

inline TaggedNormalization tag_normalized(const LinearSequenceModel& model, std::span<const std::string> norms) {
  TaggedNormalization out;
  out.alignment = output_alignment(norms);
  out.tags = model.tag(out.alignment.words);
  return out;
}

// Per original token: the tags of its normalized words joined with '+'.
inline std::vector<std::string> token_tags(const TaggedNormalization& t, std::size_t n_tokens) {
  std::vector<std::string> out(n_tokens);
  for (const auto& l : t.alignment.links) {
    std::string joined;
    for (std::size_t j = l.tgt_begin; j < l.tgt_end; ++j) {
      if (!joined.empty()) joined += kTagJoiner;
      joined += t.tags[j];
    }
    for (std::size_t i = l.src_begin; i < l.src_end; ++i) out[i] = joined;
  }
  return out;
}

struct PosEvalResult {
  std::size_t tokens = 0;
  double oracle = 0;  // percent
  double first = 0;   // percent, first aligned tag only
  ConfusionMatrix confusion;  // tokens with a single aligned word
};

// Tags `norms` (one row per sentence of `gold`) and scores against the gold
// POS column of `gold`.
inline PosEvalResult pos_eval(const LinearSequenceModel& model, const Dataset& gold, const TokenTable& norms) {
  if (norms.size() != gold.sentences.size()) throw InvalidArgument("normalization/sentence count mismatch");
  std::size_t n = 0, oracle_wrong = 0, first_wrong = 0;
  std::vector<std::string> conf_gold, conf_pred;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const auto& sent = gold.sentences[i];
    if (norms[i].size() != sent.size()) throw InvalidArgument("normalization/token count mismatch");
    std::vector<std::string> gold_pos;
    for (const auto& t : sent.tokens) {
      if (!t.pos) throw InvalidArgument("gold token '" + t.orig + "' has no POS tag");
      gold_pos.push_back(*t.pos);
    }
    auto tagged = tag_normalized(model, norms[i]);
    const auto& links = tagged.alignment.links;
    auto c = pos_oracle_counts(gold_pos, links, tagged.tags);
    n += c.tokens;
    oracle_wrong += c.tokens - c.correct;
    for (const auto& l : links)
      for (std::size_t s = l.src_begin; s < l.src_end; ++s) {
        if (tagged.tags[l.tgt_begin] != gold_pos[s]) ++first_wrong;
        if (l.tgt_end - l.tgt_begin == 1) {
          conf_gold.push_back(gold_pos[s]);
          conf_pred.push_back(tagged.tags[l.tgt_begin]);
        }
      }
  }
  PosEvalResult r;
  r.tokens = n;
  r.oracle = detail::percent_correct(oracle_wrong, n);
  r.first = detail::percent_correct(first_wrong, n);
  r.confusion = confusion_matrix(conf_gold, conf_pred);
  return r;
}

}  // namespace csnorm
