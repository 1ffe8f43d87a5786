#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include <unistd.h>

#include "csnorm/eval.hpp"
#include "csnorm/lid.hpp"
#include "csnorm/ranker.hpp"
#include "support/synthetic.hpp"

using namespace csnorm;
namespace fs = std::filesystem;

namespace {

struct World {
  synth::SyntheticWorld world{21};
  Dataset train, test;
  ResourceSet resources;
  TokenTable train_lids, test_lids;
  std::map<Strategy, NormalizationModel> models;

  World() {
    train = world.corpus(120);
    test = world.corpus(30);
    resources["TR"] = memory_resource_handle(world.resources(0));
    resources["DE"] = memory_resource_handle(world.resources(1));
    train_lids = lid_table(train);
    test_lids = lid_table(test);
  }

  RankerConfig config(Strategy s, double bias = 1.0) const {
    RankerConfig cfg;
    cfg.strategy = s;
    cfg.forest.n_trees = 10;
    cfg.original_bias = bias;
    cfg.threads = 1;
    return cfg;
  }

  const NormalizationModel& model(Strategy s) {
    auto it = models.find(s);
    if (it == models.end()) it = models.emplace(s, train_normalization_model(train, resources, config(s), &train_lids)).first;
    return it->second;
  }
};

World& world() {
  static World w;
  return w;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("csnorm_ranker_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

LanguageResources tiny_bundle() {
  LanguageResources r;
  r.language = "TR";
  r.lexicon = Lexicon("TR", {"daha", "iyi"});
  r.ngrams = build_ngrams("daha iyi\niyi daha iyi\n");
  return r;
}

}  // namespace

TEST(RankerFeatures, SchemaLengths) {
  std::vector<std::string> one{"TR"}, two{"TR", "DE"}, lid{"LID"};
  EXPECT_EQ(feature_schema(Strategy::monolingual, one).size(), 20u);
  EXPECT_EQ(feature_schema(Strategy::fragments, one).size(), 20u);
  EXPECT_EQ(feature_schema(Strategy::multilingual, two).size(), 26u);
  auto la = feature_schema(Strategy::language_aware, lid);
  EXPECT_EQ(la.size(), 21u);
  EXPECT_EQ(la.back(), "language_id");
  EXPECT_EQ(la[14], "LID.unigram_logprob");
}

TEST(RankerFeatures, OriginalCandidateVector) {
  auto bundle = tiny_bundle();
  const LanguageResources* blocks[] = {&bundle};
  std::vector<std::string> words{"dha", "iyi"};
  auto c = gen_original("dha");
  FeatureInput in{words, 0, std::string(kBoundary), 0, 0};
  auto f = featurize(c, in, blocks, Strategy::monolingual);
  ASSERT_EQ(f.size(), 20u);
  EXPECT_EQ(f[0], 1.0);   // is_original
  EXPECT_EQ(f[1], 0.0);   // from_lookup
  EXPECT_EQ(f[6], 0.0);   // edit distance
  EXPECT_EQ(f[7], 1.0);   // length ratio
  EXPECT_EQ(f[10], 1.0);  // sentence initial
  EXPECT_EQ(f[13], 0.0);  // lookup share without counts
  EXPECT_DOUBLE_EQ(f[14], bundle.ngrams.logprob("dha"));
  EXPECT_DOUBLE_EQ(f[15], bundle.ngrams.logprob("dha", std::string_view(kBoundary)));
  EXPECT_DOUBLE_EQ(f[16], bundle.ngrams.logprob("iyi", std::string_view("dha")));
  EXPECT_EQ(f[17], 0.0);        // not in lexicon
  EXPECT_EQ(f[18], kMissing);   // no embedding
  EXPECT_EQ(f[19], kMissing);

  FeatureInput mid{words, 0, "iyi", 0, 3};
  EXPECT_EQ(featurize(c, mid, blocks, Strategy::monolingual)[10], 0.0);

  Candidate daha = gen_spelling(bundle.lexicon, "dha", 1)[0];
  daha.lookup_count = 3;
  FeatureInput counted{words, 0, std::string(kBoundary), 4, 0};
  auto g = featurize(daha, counted, blocks, Strategy::monolingual);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[2], 1.0);
  EXPECT_EQ(g[6], 1.0);
  EXPECT_DOUBLE_EQ(g[12], std::log1p(3.0));
  EXPECT_DOUBLE_EQ(g[13], 0.75);
  EXPECT_EQ(g[17], 1.0);

  EXPECT_THROW(featurize(c, in, blocks, Strategy::multilingual), InvalidArgument);
  EXPECT_THROW(featurize(c, in, blocks, Strategy::language_aware), InvalidArgument);
}

TEST(RankerTraining, OnePositivePerToken) {
  auto& w = world();
  for (Strategy s : {Strategy::monolingual, Strategy::multilingual, Strategy::fragments, Strategy::language_aware}) {
    auto cfg = w.config(s);
    auto m = model_skeleton(w.train, w.resources, cfg, &w.train_lids);
    CandidateCache cache(cfg.generator);
    auto sets = build_training_instances(w.train, m, &w.train_lids, cache, 1);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> positives, rows;
    for (const auto& set : sets) {
      ASSERT_EQ(set.groups.size(), set.data.size());
      for (std::size_t r = 0; r < set.data.size(); ++r) {
        ++rows[set.groups[r]];
        positives[set.groups[r]] += set.data.y[r];
      }
    }
    std::size_t expected = 0;
    for (std::size_t i = 0; i < w.train.sentences.size(); ++i)
      for (std::size_t j = 0; j < w.train.sentences[i].size(); ++j) {
        const bool cont = w.train.sentences[i].tokens[j].is_merge_continuation();
        expected += !cont;
        EXPECT_EQ(rows.count({i, j}), cont ? 0u : 1u);
      }
    EXPECT_EQ(positives.size(), expected) << to_string(s);
    for (const auto& [g, n] : positives) EXPECT_EQ(n, 1u) << to_string(s) << " " << g.first << ":" << g.second;
  }
}

TEST(RankerTraining, NeedsLidWhereRequired) {
  auto& w = world();
  EXPECT_THROW(train_normalization_model(w.train, w.resources, w.config(Strategy::fragments)), InvalidArgument);
  auto m = w.model(Strategy::language_aware);
  auto words = w.test.sentences[0].originals();
  EXPECT_THROW(normalize_sentence(m, words), InvalidArgument);
  std::vector<std::string> short_lids{"TR"};
  EXPECT_THROW(normalize_sentence(m, words, &short_lids), InvalidArgument);
}

TEST(RankerModel, BeatsBaselinesOnHeldOutData) {
  auto& w = world();
  const auto& m = w.model(Strategy::multilingual);
  auto pred = normalize_dataset(m, w.test, nullptr, 1);
  auto dict = build_replacement_dict(w.train);
  const double acc = accuracy(w.test, pred);
  EXPECT_GT(acc, accuracy(w.test, mfr(dict, w.test)));
  EXPECT_GT(acc, accuracy(w.test, lai(w.test)));
}

TEST(RankerModel, HugeBiasKeepsEveryWord) {
  auto& w = world();
  for (Strategy s : {Strategy::monolingual, Strategy::multilingual}) {
    auto m = train_normalization_model(w.train, w.resources, w.config(s, 1e6), &w.train_lids);
    auto pred = normalize_dataset(m, w.test, &w.test_lids, 1);
    EXPECT_EQ(pred, originals_table(w.test));
  }
}

TEST(RankerModel, ThreadCountDoesNotChangeResults) {
  auto& w = world();
  auto cfg = w.config(Strategy::monolingual);
  auto a = train_normalization_model(w.train, w.resources, cfg, &w.train_lids);
  cfg.threads = 3;
  auto b = train_normalization_model(w.train, w.resources, cfg, &w.train_lids);
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  EXPECT_EQ(normalize_dataset(a, w.test, nullptr, 1), normalize_dataset(a, w.test, nullptr, 4));
}

TEST(RankerModel, FragmentsRouteToLanguageRankers) {
  auto& w = world();
  const auto& m = w.model(Strategy::fragments);
  ASSERT_EQ(m.parts.size(), 2u);
  for (const std::string lang : {"TR", "DE"}) {
    auto sub = m.submodel(lang);
    for (const auto& s : w.test.sentences) {
      auto words = s.originals();
      std::vector<std::string> lids(words.size(), lang);
      EXPECT_EQ(normalize_sentence(m, words, &lids), normalize_sentence(sub, words));
    }
  }
  auto words = w.test.sentences[0].originals();
  std::vector<std::string> lids(words.size(), "TR");
  for (std::size_t j = 1; j < lids.size(); j += 2) lids[j] = "DE";
  auto pieces = normalize_fragments(m, words, lids);
  std::vector<std::string> joined;
  for (const auto& p : pieces) {
    EXPECT_EQ(p.norms.size(), p.fragment.end - p.fragment.begin);
    joined.insert(joined.end(), p.norms.begin(), p.norms.end());
  }
  EXPECT_EQ(joined, normalize_sentence(m, words, &lids));
  EXPECT_THROW(w.model(Strategy::multilingual).submodel("TR"), InvalidArgument);
}

TEST(RankerPersistence, RoundTripAndIntegrity) {
  auto& w = world();
  const auto& m = w.model(Strategy::language_aware);
  auto bytes = serialize_model(m);
  auto back = deserialize_model(bytes);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_model(back), bytes);

  auto corrupt = bytes;
  corrupt[corrupt.size() / 2] ^= 0x10;
  EXPECT_THROW(deserialize_model(corrupt), IntegrityError);

  auto version = bytes;
  version[6] = 2;
  try {
    deserialize_model(version);
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  EXPECT_THROW(deserialize_model(bytes.substr(0, 30)), IntegrityError);
  EXPECT_THROW(LanguageResources::deserialize(bytes), IntegrityError);  // wrong payload kind
}

TEST(RankerPersistence, ResourceFilesAreHashChecked) {
  auto& w = world();
  TempDir tmp;
  const auto tr = (tmp.path / "tr.bundle").string(), de = (tmp.path / "de.bundle").string();
  w.resources["TR"].bundle->save(tr);
  w.resources["DE"].bundle->save(de);
  ResourceSet on_disk{{"TR", load_resource_handle(tr)}, {"DE", load_resource_handle(de)}};
  auto cfg = w.config(Strategy::multilingual);
  auto m = train_normalization_model(w.train, on_disk, cfg, &w.train_lids);
  const auto path = (tmp.path / "model.bin").string();
  save_model(m, path);

  auto loaded = load_model(path);
  EXPECT_EQ(loaded, m);
  EXPECT_EQ(normalize_dataset(loaded, w.test, nullptr, 1), normalize_dataset(m, w.test, nullptr, 1));

  // a different bundle under the recorded path
  synth::SyntheticWorld other(99);
  other.resources(0).save(tr);
  EXPECT_THROW(load_model(path), IntegrityError);
  // overriding the path with the right bundle works
  const auto tr2 = (tmp.path / "tr2.bundle").string();
  w.resources["TR"].bundle->save(tr2);
  EXPECT_NO_THROW(load_model(path, {{"TR", tr2}}));

  // in-memory resources leave no path behind
  const auto mem_path = (tmp.path / "mem.bin").string();
  save_model(w.model(Strategy::monolingual), mem_path);
  EXPECT_THROW(load_model(mem_path), InvalidArgument);
  EXPECT_NO_THROW(load_model(mem_path, {{"TR", tr2}, {"DE", de}}));
}

TEST(RankerLookup, LeaveOneOutCounts) {
  ReplacementDict d;
  d.add("dha", "daha", 2);
  d.add("dha", "dah", 1);
  std::vector<Candidate> base{gen_original("dha")};
  const std::string gold = "dah";
  auto c = with_lookup(base, d, "dha", &gold);
  ASSERT_EQ(c.size(), 2u);  // the single "dah" occurrence is held out
  EXPECT_EQ(c[1].form, "daha");
  EXPECT_EQ(c[1].lookup_count, 2u);
  auto all = with_lookup(base, d, "dha");
  EXPECT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].form, "dha");
}
