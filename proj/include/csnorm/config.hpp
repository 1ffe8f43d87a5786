#pragma once

// Experiment configuration, read from a JSON object. Every key is optional;
// unknown keys and wrongly typed values are rejected with the key's path.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "csnorm/binary_io.hpp"
#include "csnorm/corpus.hpp"
#include "csnorm/error.hpp"
#include "csnorm/lid.hpp"
#include "csnorm/ranker.hpp"
#include "csnorm/seqlab.hpp"

namespace csnorm {

enum class LidMode { gold, predicted };

struct Config {
  RankerConfig ranker;
  LanguagePair languages;
  std::map<std::string, std::string> resources;  // language -> bundle path
  LidConfig lid;
  PerceptronConfig pos;
  LidMode lid_mode = LidMode::gold;
  std::uint64_t seed = 42;
  std::size_t threads = 0;

  // One seed drives every randomized component.
  void set_seed(std::uint64_t s) {
    seed = s;
    ranker.forest.seed = s;
    lid.seed = s;
    pos.seed = s;
  }

  void set_threads(std::size_t t) {
    threads = t;
    ranker.threads = t;
    ranker.forest.threads = t;
  }
};

namespace detail {

using json = nlohmann::json;

class ConfigReader {
public:
  explicit ConfigReader(std::filesystem::path base) : base_(std::move(base)) {}

  void read(const json& root, Config& c) {
    object(root, "");
    for (const auto& [key, v] : root.items()) {
      const std::string path = key;
      if (key == "strategy") c.ranker.strategy = parse_strategy(str(v, path));
      else if (key == "monolingual_language") c.ranker.monolingual_language = str(v, path);
      else if (key == "languages") languages(v, path, c.languages);
      else if (key == "resources") resources(v, path, c.resources);
      else if (key == "generator") generator(v, path, c.ranker.generator);
      else if (key == "forest") forest(v, path, c.ranker.forest);
      else if (key == "original_bias") {
        c.ranker.original_bias = real(v, path);
        if (!(c.ranker.original_bias > 0)) fail(path, "must be positive");
      } else if (key == "lid") tagger(v, path, c.lid.epochs, c.lid.features);
      else if (key == "pos") tagger(v, path, c.pos.epochs, c.pos.features);
      else if (key == "lid_mode") {
        auto m = str(v, path);
        if (m == "gold") c.lid_mode = LidMode::gold;
        else if (m == "predicted") c.lid_mode = LidMode::predicted;
        else fail(path, "expected \"gold\" or \"predicted\"");
      } else if (key == "seed") seed_ = count(v, path);
      else if (key == "threads") c.set_threads(count(v, path));
      else unknown(path);
    }
    c.set_seed(seed_.value_or(c.seed));
  }

private:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw FormatError("config key '" + path + "': " + msg);
  }
  [[noreturn]] static void unknown(const std::string& path) { throw FormatError("unknown config key '" + path + "'"); }

  static void object(const json& v, const std::string& path) {
    if (!v.is_object()) {
      if (path.empty()) throw FormatError("config must be a JSON object");
      fail(path, "expected an object");
    }
  }
  static std::string str(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }
  static double real(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }
  static std::uint64_t count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  static std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  void languages(const json& v, const std::string& path, LanguagePair& langs) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected an array of two language codes");
    langs.first = str(v[0], path + "[0]");
    langs.second = str(v[1], path + "[1]");
    if (langs.first == langs.second || langs.first == kUnknownLabel || langs.second == kUnknownLabel)
      fail(path, "need two distinct content languages");
  }

  void resources(const json& v, const std::string& path, std::map<std::string, std::string>& out) {
    object(v, path);
    for (const auto& [lang, p] : v.items()) {
      std::filesystem::path file = str(p, path + "." + lang);
      if (file.is_relative() && !base_.empty()) file = base_ / file;
      out[lang] = file.lexically_normal().string();
    }
  }

  static void generator(const json& v, const std::string& path, GeneratorConfig& g) {
    object(v, path);
    for (const auto& [key, x] : v.items()) {
      const std::string p = path + "." + key;
      if (key == "embedding_k") g.embedding_k = count(x, p);
      else if (key == "max_dist_long") g.max_dist_long = count(x, p);
      else if (key == "max_dist_short") g.max_dist_short = count(x, p);
      else if (key == "long_word_min_length") g.long_word_min_length = count(x, p);
      else if (key == "split_min_part") g.split_min_part = count(x, p);
      else unknown(p);
    }
    for (auto d : {g.max_dist_long, g.max_dist_short})
      if (d < 1 || d > 2) fail(path, "edit distances must be 1 or 2");
    if (g.split_min_part == 0) fail(path + ".split_min_part", "must be positive");
  }

  static void forest(const json& v, const std::string& path, ForestConfig& f) {
    object(v, path);
    for (const auto& [key, x] : v.items()) {
      const std::string p = path + "." + key;
      if (key == "n_trees") {
        f.n_trees = count(x, p);
        if (f.n_trees == 0) fail(p, "must be positive");
      } else if (key == "max_depth") {
        auto d = integer(x, p);
        if (d < -1) fail(p, "must be -1 (unlimited) or non-negative");
        f.max_depth = static_cast<int>(d);
      } else if (key == "min_leaf") {
        f.min_leaf = count(x, p);
        if (f.min_leaf == 0) fail(p, "must be positive");
      } else if (key == "max_features") f.max_features = count(x, p);
      else if (key == "bootstrap") {
        if (!x.is_boolean()) fail(p, "expected true or false");
        f.bootstrap = x.get<bool>();
      } else unknown(p);
    }
  }

  static void tagger(const json& v, const std::string& path, std::size_t& epochs, FeatureConfig& fc) {
    object(v, path);
    for (const auto& [key, x] : v.items()) {
      const std::string p = path + "." + key;
      if (key == "epochs") epochs = count(x, p);
      else if (key == "window") fc.window = count(x, p);
      else if (key == "max_ngram") fc.max_ngram = count(x, p);
      else if (key == "max_affix") fc.max_affix = count(x, p);
      else unknown(p);
    }
  }

  std::filesystem::path base_;
  std::optional<std::uint64_t> seed_;
};

}  // namespace detail

// Empty or whitespace-only text yields the defaults. Relative resource paths
// are resolved against `base_dir`.
inline Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  Config c;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return c;
  detail::json root;
  try {
    root = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::ConfigReader(base_dir).read(root, c);
  return c;
}

inline Config load_config(const std::string& path) {
  return parse_config(read_file(path), std::filesystem::path(path).parent_path());
}

}  // namespace csnorm
