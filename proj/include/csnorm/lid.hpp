#pragma once

// Word-level language identification over coarse labels, and the monolingual
// fragment split used by the Fragments strategy.

#include <span>
#include <string>
#include <vector>

#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/seqlab.hpp"

namespace csnorm {

struct LidConfig {
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  FeatureConfig features;
};

inline std::vector<LabeledSequence> lid_sequences(const Dataset& data) {
  if (data.label_scheme != LabelScheme::coarse)
    throw InvalidArgument("LID training needs coarse labels; map fine labels first");
  std::vector<LabeledSequence> seqs;
  for (const auto& s : data.sentences) {
    LabeledSequence seq;
    for (const auto& t : s.tokens) {
      if (!t.lid) throw InvalidArgument("token '" + t.orig + "' has no LID label");
      if (!is_coarse_label(*t.lid, data.languages))
        throw InvalidArgument("LID label '" + *t.lid + "' is not a coarse label");
      seq.words.push_back(t.orig);
      seq.labels.push_back(*t.lid);
    }
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

inline LinearSequenceModel train_lid(const Dataset& data, const LidConfig& cfg = {}) {
  auto seqs = lid_sequences(data);
  return PerceptronTrainer::train(seqs, {cfg.epochs, cfg.seed, cfg.features});
}

inline TokenTable tag_lid(const LinearSequenceModel& model, const Dataset& data) {
  TokenTable out;
  out.reserve(data.sentences.size());
  for (const auto& s : data.sentences) out.push_back(model.tag(s.originals()));
  return out;
}

// Copy of data with the LID column replaced by the given labels.
inline Dataset with_lid(Dataset data, const TokenTable& labels) {
  if (labels.size() != data.sentences.size()) throw InvalidArgument("label/sentence count mismatch");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != data.sentences[i].size()) throw InvalidArgument("label/token count mismatch");
    for (std::size_t j = 0; j < labels[i].size(); ++j) data.sentences[i].tokens[j].lid = labels[i][j];
  }
  data.label_scheme = detail::detect_scheme(data.sentences, data.languages);
  return data;
}

inline TokenTable lid_table(const Dataset& data) {
  TokenTable out;
  for (const auto& s : data.sentences) {
    std::vector<std::string> row;
    for (const auto& t : s.tokens) {
      if (!t.lid) throw InvalidArgument("token '" + t.orig + "' has no LID label");
      row.push_back(data.label_scheme == LabelScheme::fine ? map_labels_coarse(*t.lid, data.languages) : *t.lid);
    }
    out.push_back(std::move(row));
  }
  return out;
}

// UN labels take the label of the previous word. A leading UN run takes the
// first content label that follows; an all-UN sentence becomes lang1.
inline std::vector<std::string> resolve_unknown_labels(std::span<const std::string> labels, const LanguagePair& langs) {
  std::vector<std::string> out(labels.begin(), labels.end());
  std::string fill;
  for (const auto& l : labels)
    if (l != kUnknownLabel) {
      fill = l;
      break;
    }
  if (fill.empty()) fill = langs.first;
  for (auto& l : out) {
    if (l == kUnknownLabel) l = fill;
    else fill = l;
  }
  return out;
}

struct Fragment {
  std::size_t begin = 0;  // token range [begin, end)
  std::size_t end = 0;
  std::string language;

  bool operator==(const Fragment&) const = default;
};

inline std::vector<Fragment> fragment_split(std::span<const std::string> labels, const LanguagePair& langs = {}) {
  std::vector<Fragment> out;
  auto resolved = resolve_unknown_labels(labels, langs);
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    if (out.empty() || out.back().language != resolved[i]) out.push_back({i, i + 1, resolved[i]});
    else out.back().end = i + 1;
  }
  return out;
}

}  // namespace csnorm
