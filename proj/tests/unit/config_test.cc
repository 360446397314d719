#include <gtest/gtest.h>

#include <fstream>

#include "stylo/config.h"
#include "stylo/error.h"

namespace stylo {
namespace {

const char* kMinimal = R"(config_version = 1
seed = 9

[data]
train = data/train.tsv
test = /abs/test.tsv

[features]
blocks = word_bow

[classifiers]
list = majority
)";

ExperimentConfig parse(const std::string& text) {
  return parse_experiment_config(text, "/base", "test.ini");
}

std::string with(const std::string& extra) { return std::string(kMinimal) + extra; }

// kMinimal with its block list swapped out.
std::string with_blocks(const std::string& blocks, const std::string& extra = "") {
  std::string s = kMinimal;
  s.replace(s.find("blocks = word_bow"), 17, "blocks = " + blocks);
  return s + extra;
}

// Message of the UsageError `text` raises, or "" if it parses.
std::string usage_error(const std::string& text) {
  try {
    parse(text);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

TEST(KeyValueFile, SectionsCommentsAndWhitespace) {
  auto f = KeyValueFile::parse("a = 1\n# comment\n; also\n\n[s]\n  b=two words  \r\n[t]\nb = 3\n");
  EXPECT_EQ(f.take("", "a"), "1");
  EXPECT_EQ(f.take("s", "b"), "two words");
  EXPECT_EQ(f.take("t", "b"), "3");
  EXPECT_EQ(f.take("s", "missing"), std::nullopt);
  EXPECT_NO_THROW(f.reject_unused());
}

TEST(KeyValueFile, ErrorsCarryLineNumbers) {
  auto expect = [](const char* text, const char* needle) {
    try {
      auto f = KeyValueFile::parse(text, "x.ini");
      f.reject_unused();
      FAIL() << "no error for " << text;
    } catch (const UsageError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect("a = 1\na = 2\n", "x.ini:2: duplicate key 'a'");
  expect("[s\n", "x.ini:1: unterminated section");
  expect("\njust words\n", "x.ini:2: expected key = value");
  expect("a b = 1\n", "bad key");
  expect("[s]\nfoo = 1\n", "x.ini:2: unknown key [s] foo");
}

TEST(ExperimentConfig, MinimalDefaults) {
  const auto c = parse(kMinimal);
  EXPECT_EQ(c.config_version, 1);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.data.train, std::filesystem::path("/base/data/train.tsv"));
  EXPECT_EQ(c.data.test, std::filesystem::path("/abs/test.tsv"));
  EXPECT_EQ(c.data.format, DatasetFormat::kTsv);
  EXPECT_TRUE(c.features[FeatureBlock::kWordBow].enabled);
  EXPECT_FALSE(c.features[FeatureBlock::kCharBow].enabled);
  EXPECT_EQ(c.classifiers, std::vector<ModelKind>{ModelKind::kMajority});
  EXPECT_EQ(c.output.dir, std::filesystem::path("/base/out"));
  EXPECT_FALSE(c.output.reproducible);
  EXPECT_TRUE(c.output.save_models);
  EXPECT_EQ(c.settings.knn_k, 5u);
  EXPECT_EQ(c.settings.mlp.hidden, 100u);
  EXPECT_EQ(c.settings.rforest.n_trees, 100u);
  EXPECT_EQ(c.settings.gboost.max_depth, 3u);
  EXPECT_EQ(c.source_text, kMinimal);
  EXPECT_EQ(c.label_space(), std::nullopt);
}

TEST(ExperimentConfig, EveryKey) {
  const auto c = parse(R"(config_version = 1
name = full
seed = 3
seeds = 1, 2,3

[data]
format = jsonl
dataset = all.jsonl
train_fraction = 2/3
split_seed = 44
id_field = uid
text_field = body
label_field = bias
headline_field = title
labels = left,center,right
annotations = a.conllu
embeddings = e.txt
embedding_dim = 768

[features]
blocks = char_bow, pos_bow, morph, embedding, word_tfidf
ablations = true
char_bow.ngram = 2-3
char_bow.min_df = 2
char_bow.max_features = 500
char_bow.l2_normalize = true
pos_bow.ngram = 4
word_tfidf.sublinear_tf = yes

[metrics]
ordinal = true
ranks = -1,0,1

[classifiers]
list = gboost,majority
knn.k = 3
logreg.l2 = 0
logreg.epochs = 10
logreg.learning_rate = 0.1
linsvm.c = 2.5
linsvm.epochs = 7
mlp.hidden = 8
mlp.epochs = 9
mlp.learning_rate = 0.2
mlp.seed = 77
dtree.max_depth = none
dtree.min_samples_leaf = 2
rforest.n_trees = 10
rforest.seed = 88
rforest.bootstrap = false
rforest.max_features = 4
rforest.max_depth = 6
rforest.min_samples_leaf = 3
gboost.n_stages = 5
gboost.learning_rate = 0.3
gboost.max_depth = 2
gboost.min_samples_leaf = 4

[output]
dir = results/x
reproducible = true
save_models = false
)");
  EXPECT_EQ(c.name, "full");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(c.data.format, DatasetFormat::kJsonl);
  EXPECT_EQ(c.data.dataset, std::filesystem::path("/base/all.jsonl"));
  EXPECT_EQ(c.data.train_fraction, (Fraction{2, 3}));
  EXPECT_EQ(c.split_seed(), 44u);
  EXPECT_EQ(c.data.schema.id_field, "uid");
  EXPECT_EQ(c.data.schema.text_field, "body");
  EXPECT_EQ(c.data.schema.label_field, "bias");
  EXPECT_EQ(c.data.schema.headline_field, "title");
  EXPECT_EQ(c.features.embedding_dim, 768u);
  EXPECT_TRUE(c.ablations);
  const auto& ch = c.features[FeatureBlock::kCharBow];
  EXPECT_EQ(ch.ngram_min, 2);
  EXPECT_EQ(ch.ngram_max, 3);
  EXPECT_EQ(ch.min_df, 2);
  EXPECT_EQ(ch.max_features, 500u);
  EXPECT_TRUE(ch.l2_normalize);
  EXPECT_EQ(c.features[FeatureBlock::kPosBow].ngram_min, 4);
  EXPECT_EQ(c.features[FeatureBlock::kPosBow].ngram_max, 4);
  EXPECT_TRUE(c.features[FeatureBlock::kWordTfidf].sublinear_tf);
  EXPECT_FALSE(c.features[FeatureBlock::kWordBow].enabled);
  EXPECT_EQ(c.label_space(), LabelSpace({"left", "center", "right"}, {-1, 0, 1}));
  EXPECT_EQ(c.classifiers, (std::vector<ModelKind>{ModelKind::kGBoost, ModelKind::kMajority}));
  const auto& s = c.settings;
  EXPECT_EQ(s.knn_k, 3u);
  EXPECT_EQ(s.logreg.l2, 0.0);
  EXPECT_EQ(s.logreg.epochs, 10);
  EXPECT_EQ(s.logreg.learning_rate, 0.1);
  EXPECT_EQ(s.linsvm.c, 2.5);
  EXPECT_EQ(s.linsvm.epochs, 7);
  EXPECT_EQ(s.mlp.hidden, 8u);
  EXPECT_EQ(s.mlp.epochs, 9);
  EXPECT_EQ(s.mlp.learning_rate, 0.2);
  EXPECT_EQ(c.mlp_seed(), 77u);
  EXPECT_EQ(s.dtree.max_depth, std::nullopt);
  EXPECT_EQ(s.dtree.min_samples_leaf, 2u);
  EXPECT_EQ(s.rforest.n_trees, 10u);
  EXPECT_EQ(c.rforest_seed(), 88u);
  EXPECT_FALSE(s.rforest.bootstrap);
  EXPECT_EQ(s.rforest.max_features, 4u);
  EXPECT_EQ(s.rforest.tree.max_depth, 6u);
  EXPECT_EQ(s.rforest.tree.min_samples_leaf, 3u);
  EXPECT_EQ(s.gboost.n_stages, 5u);
  EXPECT_EQ(s.gboost.learning_rate, 0.3);
  EXPECT_EQ(s.gboost.max_depth, 2u);
  EXPECT_EQ(s.gboost.min_samples_leaf, 4u);
  EXPECT_EQ(c.output.dir, std::filesystem::path("/base/results/x"));
  EXPECT_TRUE(c.output.reproducible);
  EXPECT_FALSE(c.output.save_models);
}

TEST(ExperimentConfig, SeedsDefaultToGlobal) {
  const auto c = parse(kMinimal);
  EXPECT_EQ(c.mlp_seed(), 9u);
  EXPECT_EQ(c.rforest_seed(), 9u);
  EXPECT_EQ(c.split_seed(), 9u);
}

TEST(ExperimentConfig, OrdinalRanksDefaultToPositions) {
  const auto c = parse(with("[metrics]\nordinal = true\n[data]\nlabels = a,b,c\n"));
  EXPECT_EQ(c.label_space(), LabelSpace({"a", "b", "c"}, {0, 1, 2}));
}

TEST(ExperimentConfig, Version) {
  EXPECT_NE(usage_error("[data]\ntrain = a\n").find("missing config_version"), std::string::npos);
  const std::string e = usage_error("config_version = 2\n");
  EXPECT_NE(e.find("unsupported config_version '2' (supported: 1)"), std::string::npos) << e;
}

TEST(ExperimentConfig, StructuralErrors) {
  const std::pair<std::string, std::string> cases[] = {
      {"config_version = 1\n[features]\nblocks = word_bow\n[classifiers]\nlist = knn\n",
       "needs train and test, or dataset"},
      {with("[data]\ndataset = x.tsv\n"), "not both"},
      {"config_version = 1\n[data]\ntrain = a\n[features]\nblocks = word_bow\n"
       "[classifiers]\nlist = knn\n",
       "must be given together"},
      {"config_version = 1\n[data]\ntrain = a\ntest = b\n[features]\nblocks = word_bow\n",
       "list is empty"},
      {"config_version = 1\n[data]\ntrain = a\ntest = b\n[classifiers]\nlist = knn\n",
       "no feature block"},
      {with("[metrics]\nranks = 0,1\n"), "ordinal = false"},
      {with("[metrics]\nordinal = true\n"), "need [data] labels"},
      {with("[metrics]\nordinal = true\nranks = 0,1\n[data]\nlabels = a,b,c\n"),
       "one entry per label"},
      {with("[metrics]\nordinal = true\nranks = 0,0\n[data]\nlabels = a,b\n"), "config:"},
      {with_blocks("embedding"), "needs [data] embeddings"},
      {with_blocks("embedding", "[data]\nembeddings = e.txt\n"), "needs [data] embedding_dim"},
      {with_blocks("morph"), "needs [data] annotations"},
  };
  for (const auto& [text, needle] : cases) {
    std::string e;
    try {
      const auto c = parse(text);
      c.label_space();
    } catch (const UsageError& ex) {
      e = ex.what();
    }
    EXPECT_NE(e.find(needle), std::string::npos) << "expected '" << needle << "', got '" << e
                                                 << "' for:\n" << text;
  }
}

TEST(ExperimentConfig, ValueErrors) {
  const std::pair<std::string, std::string> cases[] = {
      {"config_version = 1\nseed = -1\n", "seed: expected an unsigned 64-bit integer"},
      {with("[classifiers]\nknn.k = 0\n"), "[classifiers] knn.k: expected an integer in [1,"},
      {with("[classifiers]\nknn.k = 2.5\n"), "knn.k"},
      {with("[classifiers]\nlinsvm.c = 0\n"), "expected a positive number"},
      {with("[classifiers]\nlogreg.l2 = -1\n"), "expected a non-negative number"},
      {with("[classifiers]\nmlp.learning_rate = nan\n"), "mlp.learning_rate"},
      {with("[output]\nreproducible = maybe\n"), "expected true or false"},
      {with("[features]\nchar_bow.ngram = 0-4\n"), "within 1..4"},
      {with("[features]\nchar_bow.ngram = 3-2\n"), "within 1..4"},
      {with("[features]\nchar_bow.ngram = 1-5\n"), "within 1..4"},
      {with("[features]\nword_bow.ngram = 1-2\n"), "unknown key [features] word_bow.ngram"},
      {with("[features]\nmorph.sublinear_tf = true\n"), "unknown key"},
      {"config_version = 1\n[features]\nblocks = word_bow,nope\n", "unknown feature block 'nope'"},
      {"config_version = 1\n[features]\nblocks = word_bow,word_bow\n", "listed twice"},
      {"config_version = 1\n[classifiers]\nlist = knn,svm\n", "unknown classifier 'svm'"},
      {"config_version = 1\n[classifiers]\nlist = knn,knn\n", "listed twice"},
      {"config_version = 1\n[data]\nformat = csv\n", "unknown dataset format 'csv'"},
      {"config_version = 1\n[data]\ntrain_fraction = 1.5\n", "train_fraction"},
      {"config_version = 1\n[classifiers]\nlist = knn,,mlp\n", "empty list item"},
      {with("[data]\nsurprise = 1\n"), "unknown key [data] surprise"},
  };
  for (const auto& [text, needle] : cases) {
    const std::string e = usage_error(text);
    EXPECT_NE(e.find(needle), std::string::npos) << "expected '" << needle << "', got '" << e
                                                 << "' for:\n" << text;
  }
}

TEST(ExperimentConfig, LoadResolvesAgainstConfigDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "stylo_config_load";
  std::filesystem::create_directories(dir / "sub");
  {
    std::ofstream(dir / "sub" / "x.ini") << kMinimal;
  }
  const auto c = load_experiment_config(dir / "sub" / "x.ini");
  EXPECT_EQ(c.data.train, (dir / "sub" / "data" / "train.tsv").lexically_normal());
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_experiment_config(dir / "missing.ini"), UsageError);
}

const char* kThreeBlocks = R"(config_version = 1
[data]
train = a
test = b
[features]
blocks = word_bow,char_bow,pos_bow
[classifiers]
list = gboost,knn,majority,mlp
)";

TEST(Filters, FeatureFilterRestrictsEnabledBlocks) {
  auto c = parse(kThreeBlocks);
  apply_feature_filter(c, "pos_bow, word_bow");
  EXPECT_TRUE(c.features[FeatureBlock::kWordBow].enabled);
  EXPECT_FALSE(c.features[FeatureBlock::kCharBow].enabled);
  EXPECT_TRUE(c.features[FeatureBlock::kPosBow].enabled);
  EXPECT_THROW(apply_feature_filter(c, "char_bow"), UsageError);
  EXPECT_THROW(apply_feature_filter(c, ""), UsageError);
  EXPECT_THROW(apply_feature_filter(c, "bogus"), UsageError);
}

TEST(Filters, ClassifierFilterKeepsTableOrder) {
  auto c = parse(kThreeBlocks);
  apply_classifier_filter(c, "mlp,majority,gboost");
  EXPECT_EQ(c.classifiers,
            (std::vector<ModelKind>{ModelKind::kMajority, ModelKind::kMlp, ModelKind::kGBoost}));
  EXPECT_THROW(apply_classifier_filter(c, "knn"), UsageError);  // filtered out above
  EXPECT_THROW(apply_classifier_filter(c, "nope"), UsageError);
  EXPECT_THROW(apply_classifier_filter(c, " , "), UsageError);
}

}  // namespace
}  // namespace stylo
