#pragma once

// Linear-chain sequence labeler: sparse string features, exact Viterbi
// decoding, and averaged structured-perceptron training. Shared by language
// identification and POS tagging.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csnorm/binary_io.hpp"
#include "csnorm/error.hpp"
#include "csnorm/rng.hpp"
#include "csnorm/unicode.hpp"

namespace csnorm {

// ---------------------------------------------------------------------------
// Features

struct FeatureConfig {
  std::size_t window = 2;     // context words at offsets -window..+window
  std::size_t max_ngram = 4;  // character n-grams 1..max_ngram
  std::size_t max_affix = 3;  // prefixes/suffixes 1..max_affix
};

inline std::vector<std::string> emission_features(std::span<const std::string> words, std::size_t i,
                                                  const FeatureConfig& cfg = {}) {
  std::vector<std::string> f;
  const std::string& w = words[i];
  const std::string lower = unicode::lowercase(w);
  const auto cps = unicode::to_code_points(lower);
  f.push_back("bias");
  f.push_back("w=" + lower);
  f.push_back("shape=" + unicode::word_shape(w));
  if (unicode::all_digits(w)) f.push_back("digit");
  if (unicode::all_punct(w)) f.push_back("punct");
  if (unicode::has_non_ascii(w)) f.push_back("nonascii");
  if (unicode::starts_upper(w)) f.push_back("cap");

  // Character n-grams over the padded word.
  std::u32string padded = U"^" + cps + U"$";
  for (std::size_t n = 1; n <= cfg.max_ngram; ++n)
    for (std::size_t s = 0; s + n <= padded.size(); ++s)
      f.push_back("c" + std::to_string(n) + "=" + unicode::from_code_points(padded.substr(s, n)));
  for (std::size_t n = 1; n <= cfg.max_affix && n <= cps.size(); ++n) {
    f.push_back("p=" + unicode::from_code_points(cps.substr(0, n)));
    f.push_back("s=" + unicode::from_code_points(cps.substr(cps.size() - n)));
  }
  for (std::size_t d = 1; d <= cfg.window; ++d) {
    auto offset = std::to_string(d);
    f.push_back("w-" + offset + "=" + (i >= d ? unicode::lowercase(words[i - d]) : std::string("<s>")));
    f.push_back("w+" + offset + "=" + (i + d < words.size() ? unicode::lowercase(words[i + d]) : std::string("</s>")));
  }
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

// ---------------------------------------------------------------------------
// Decoding

// Dense scores of one sentence: emission[i * labels + y], transition[prev * labels + y],
// start[y] for the first position.
struct ScoreLattice {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<double> emission;
  std::vector<double> transition;
  std::vector<double> start;

  double emit(std::size_t i, std::size_t y) const { return emission[i * labels + y]; }
  double trans(std::size_t a, std::size_t b) const { return transition[a * labels + b]; }
};

// Exact argmax over all label sequences. Among equally scored sequences the
// lexicographically smallest label-index sequence wins: best suffix scores
// are computed right to left, then labels are fixed left to right choosing
// the lowest index that attains the optimum.
inline std::vector<std::size_t> viterbi_decode(const ScoreLattice& lat) {
  const std::size_t n = lat.length, L = lat.labels;
  if (n == 0) return {};
  if (L == 0) throw InvalidArgument("lattice without labels");
  // suffix[i * L + y]: best score of positions i+1..n-1 given label y at i.
  std::vector<double> suffix(n * L, 0.0);
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t y = 0; y < L; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t z = 0; z < L; ++z)
        best = std::max(best, lat.trans(y, z) + lat.emit(i + 1, z) + suffix[(i + 1) * L + z]);
      suffix[i * L + y] = best;
    }
  std::vector<std::size_t> out(n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < L; ++y) {
    double s = lat.start[y] + lat.emit(0, y) + suffix[y];
    if (s > best) {
      best = s;
      out[0] = y;
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t y = out[i];
    const double target = suffix[i * L + y];
    for (std::size_t z = 0; z < L; ++z)
      if (lat.trans(y, z) + lat.emit(i + 1, z) + suffix[(i + 1) * L + z] == target) {
        out[i + 1] = z;
        break;
      }
  }
  return out;
}

inline double sequence_score(const ScoreLattice& lat, std::span<const std::size_t> labels) {
  double s = lat.start[labels[0]] + lat.emit(0, labels[0]);
  for (std::size_t i = 1; i < labels.size(); ++i) s += lat.trans(labels[i - 1], labels[i]) + lat.emit(i, labels[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Model

class LinearSequenceModel {
public:
  struct Weight {
    std::uint32_t label;
    double value;
    bool operator==(const Weight&) const = default;
  };

  LinearSequenceModel() = default;
  explicit LinearSequenceModel(std::vector<std::string> labels, FeatureConfig cfg = {})
      : labels_(std::move(labels)), cfg_(cfg),
        transition_(labels_.size() * labels_.size(), 0.0), start_(labels_.size(), 0.0) {}

  const std::vector<std::string>& labels() const { return labels_; }
  const FeatureConfig& feature_config() const { return cfg_; }
  std::size_t feature_count() const { return features_.size(); }

  std::size_t epochs = 0;
  std::uint64_t seed = 0;

  ScoreLattice lattice(std::span<const std::string> words) const {
    ScoreLattice lat;
    lat.length = words.size();
    lat.labels = labels_.size();
    lat.emission.assign(words.size() * labels_.size(), 0.0);
    lat.transition = transition_;
    lat.start = start_;
    for (std::size_t i = 0; i < words.size(); ++i)
      for (const auto& f : emission_features(words, i, cfg_)) {
        auto it = index_.find(f);
        if (it == index_.end()) continue;
        for (const auto& w : weights_[it->second]) lat.emission[i * labels_.size() + w.label] += w.value;
      }
    return lat;
  }

  std::vector<std::string> tag(std::span<const std::string> words) const {
    if (words.empty()) return {};
    if (labels_.empty()) throw InvalidArgument("model has no labels");
    auto ids = viterbi_decode(lattice(words));
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto y : ids) out.push_back(labels_[y]);
    return out;
  }

  // Weight access for inspection and tests.
  double weight(std::string_view feature, std::size_t label) const {
    auto it = index_.find(std::string(feature));
    if (it == index_.end()) return 0.0;
    for (const auto& w : weights_[it->second])
      if (w.label == label) return w.value;
    return 0.0;
  }
  double transition(std::size_t a, std::size_t b) const { return transition_[a * labels_.size() + b]; }
  double start(std::size_t y) const { return start_[y]; }

  // Canonical (feature-sorted) content, used for equality and serialization.
  std::map<std::string, std::vector<Weight>> sorted_weights() const {
    std::map<std::string, std::vector<Weight>> out;
    for (std::size_t i = 0; i < features_.size(); ++i)
      if (!weights_[i].empty()) out.emplace(features_[i], weights_[i]);
    return out;
  }

  std::string serialize() const {
    BinaryWriter w;
    w.u32(static_cast<std::uint32_t>(labels_.size()));
    for (const auto& l : labels_) w.str(l);
    w.u32(static_cast<std::uint32_t>(cfg_.window));
    w.u32(static_cast<std::uint32_t>(cfg_.max_ngram));
    w.u32(static_cast<std::uint32_t>(cfg_.max_affix));
    w.u32(static_cast<std::uint32_t>(epochs));
    w.u64(seed);
    for (double t : transition_) w.f64(t);
    for (double s : start_) w.f64(s);
    auto sorted = sorted_weights();
    w.u32(static_cast<std::uint32_t>(sorted.size()));
    for (const auto& [name, ws] : sorted) {
      w.str(name);
      w.u32(static_cast<std::uint32_t>(ws.size()));
      for (const auto& x : ws) {
        w.u32(x.label);
        w.f64(x.value);
      }
    }
    return seal_container(PayloadKind::sequence_model, w.bytes());
  }

  static LinearSequenceModel deserialize(std::string_view bytes) {
    BinaryReader r(open_container(bytes, PayloadKind::sequence_model));
    std::vector<std::string> labels(r.u32());
    for (auto& l : labels) l = r.str();
    FeatureConfig cfg;
    cfg.window = r.u32();
    cfg.max_ngram = r.u32();
    cfg.max_affix = r.u32();
    LinearSequenceModel m(std::move(labels), cfg);
    m.epochs = r.u32();
    m.seed = r.u64();
    for (double& t : m.transition_) t = r.f64();
    for (double& s : m.start_) s = r.f64();
    auto nf = r.u32();
    for (std::uint32_t i = 0; i < nf; ++i) {
      auto name = r.str();
      std::vector<Weight> ws(r.u32());
      for (auto& x : ws) {
        x.label = r.u32();
        x.value = r.f64();
        if (x.label >= m.labels_.size()) throw IntegrityError("weight refers to unknown label");
      }
      m.add_feature(name, std::move(ws));
    }
    if (!r.at_end()) throw IntegrityError("trailing bytes in sequence model");
    return m;
  }

  void save(const std::string& path) const { write_file(path, serialize()); }
  static LinearSequenceModel load(const std::string& path) { return deserialize(read_file(path)); }

  bool operator==(const LinearSequenceModel& o) const {
    return labels_ == o.labels_ && transition_ == o.transition_ && start_ == o.start_ && epochs == o.epochs &&
           seed == o.seed && sorted_weights() == o.sorted_weights();
  }

private:
  friend class PerceptronTrainer;

  void add_feature(const std::string& name, std::vector<Weight> ws) {
    index_.emplace(name, static_cast<std::uint32_t>(features_.size()));
    features_.push_back(name);
    weights_.push_back(std::move(ws));
  }

  std::vector<std::string> labels_;
  FeatureConfig cfg_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<Weight>> weights_;  // per feature, sparse over labels
  std::vector<double> transition_;
  std::vector<double> start_;
};

// ---------------------------------------------------------------------------
// Training

struct LabeledSequence {
  std::vector<std::string> words;
  std::vector<std::string> labels;
};

struct PerceptronConfig {
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  FeatureConfig features;
};

// Averaged structured perceptron. Averaging uses the standard lazy form:
// every update at step c also accumulates c * delta, and the averaged weight
// is w - acc / c_final, which equals the mean of the weight vectors observed
// after each training instance.
class PerceptronTrainer {
public:
  static LinearSequenceModel train(std::span<const LabeledSequence> data, const PerceptronConfig& cfg) {
    if (data.empty()) throw InvalidArgument("no training sequences");
    std::vector<std::string> labels;
    for (const auto& s : data) {
      if (s.words.size() != s.labels.size()) throw InvalidArgument("words/labels length mismatch");
      if (s.words.empty()) throw InvalidArgument("empty training sequence");
      labels.insert(labels.end(), s.labels.begin(), s.labels.end());
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::unordered_map<std::string, std::uint32_t> label_id;
    for (std::uint32_t i = 0; i < labels.size(); ++i) label_id.emplace(labels[i], i);
    const std::size_t L = labels.size();

    // Feature ids are assigned in first-seen order over the corpus.
    std::vector<std::string> feature_names;
    std::unordered_map<std::string, std::uint32_t> feature_id;
    struct Encoded {
      std::vector<std::vector<std::uint32_t>> feats;
      std::vector<std::uint32_t> gold;
    };
    std::vector<Encoded> enc(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
      for (std::size_t i = 0; i < data[s].words.size(); ++i) {
        std::vector<std::uint32_t> ids;
        for (auto& f : emission_features(data[s].words, i, cfg.features)) {
          auto [it, inserted] = feature_id.emplace(f, static_cast<std::uint32_t>(feature_names.size()));
          if (inserted) feature_names.push_back(f);
          ids.push_back(it->second);
        }
        enc[s].feats.push_back(std::move(ids));
        enc[s].gold.push_back(label_id.at(data[s].labels[i]));
      }
    }

    struct Param {
      double w = 0, acc = 0;
    };
    std::vector<std::vector<std::pair<std::uint32_t, Param>>> emit(feature_names.size());
    std::vector<Param> trans(L * L), start(L);
    auto param = [&](std::uint32_t f, std::uint32_t y) -> Param& {
      auto& v = emit[f];
      for (auto& [l, p] : v)
        if (l == y) return p;
      v.emplace_back(y, Param{});
      return v.back().second;
    };
    double step = 1;  // number of instances seen so far + 1
    auto bump = [&](Param& p, double delta) {
      p.w += delta;
      p.acc += step * delta;
    };

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order);
      for (auto s : order) {
        const auto& e = enc[s];
        const std::size_t n = e.gold.size();
        ScoreLattice lat;
        lat.length = n;
        lat.labels = L;
        lat.emission.assign(n * L, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (auto f : e.feats[i])
            for (auto& [l, p] : emit[f]) lat.emission[i * L + l] += p.w;
        lat.transition.resize(L * L);
        for (std::size_t k = 0; k < L * L; ++k) lat.transition[k] = trans[k].w;
        lat.start.resize(L);
        for (std::size_t k = 0; k < L; ++k) lat.start[k] = start[k].w;
        auto pred = viterbi_decode(lat);
        if (!std::equal(pred.begin(), pred.end(), e.gold.begin())) {
          for (std::size_t i = 0; i < n; ++i) {
            const auto g = e.gold[i], p = static_cast<std::uint32_t>(pred[i]);
            if (g != p)
              for (auto f : e.feats[i]) {
                bump(param(f, g), 1.0);
                bump(param(f, p), -1.0);
              }
            if (i == 0) {
              if (g != p) {
                bump(start[g], 1.0);
                bump(start[p], -1.0);
              }
            } else {
              const auto gp = e.gold[i - 1], pp = static_cast<std::uint32_t>(pred[i - 1]);
              if (gp != pp || g != p) {
                bump(trans[gp * L + g], 1.0);
                bump(trans[pp * L + p], -1.0);
              }
            }
          }
        }
        step += 1;
      }
    }

    LinearSequenceModel m(labels, cfg.features);
    m.epochs = cfg.epochs;
    m.seed = cfg.seed;
    const double seen = step - 1;
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
      std::vector<LinearSequenceModel::Weight> ws;
      std::sort(emit[f].begin(), emit[f].end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [l, p] : emit[f]) {
        double v = averaged_value(p.w, p.acc, seen);
        if (v != 0.0) ws.push_back({l, v});
      }
      m.add_feature(feature_names[f], std::move(ws));
    }
    for (std::size_t k = 0; k < L * L; ++k) m.transition_[k] = averaged_value(trans[k].w, trans[k].acc, seen);
    for (std::size_t k = 0; k < L; ++k) m.start_[k] = averaged_value(start[k].w, start[k].acc, seen);
    return m;
  }

  // An update delta applied while processing instance t (1-based) is part of
  // the weight vectors after instances t..T, i.e. (T - t + 1) of them. With
  // acc = sum t * delta and w = sum delta: sum delta (T - t + 1) / T
  // = w + (w - acc) / T.
  static double averaged_value(double w, double acc, double seen) {
    if (seen <= 0) return 0.0;
    return w + (w - acc) / seen;
  }
};

inline LinearSequenceModel train_perceptron(std::span<const LabeledSequence> data, std::size_t epochs,
                                            std::uint64_t seed, FeatureConfig features = {}) {
  return PerceptronTrainer::train(data, {epochs, seed, features});
}

inline double tag_accuracy(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.size() != pred.size()) throw InvalidArgument("tag_accuracy: length mismatch");
  if (gold.empty()) return 1.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) ok += gold[i] == pred[i];
  return static_cast<double>(ok) / static_cast<double>(gold.size());
}

}  // namespace csnorm
