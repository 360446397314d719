#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "stylo/annotate.h"
#include "stylo/config.h"
#include "stylo/error.h"
#include "stylo/features.h"
#include "stylo/synth.h"
#include "test_support.h"

namespace stylo {
namespace {

using testing::read_file;
using testing::TempDir;

std::map<std::string, std::string> files_of(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = read_file(e.path());
  }
  return out;
}

TEST(Synth, RejectsTinyCorpora) {
  EXPECT_THROW(generate_synthetic_corpus(SynthTask::kSubjectivity, {1, 49}), UsageError);
  EXPECT_NO_THROW(generate_synthetic_corpus(SynthTask::kSubjectivity, {1, 50}));
  EXPECT_THROW(parse_synth_task("sentiment"), UsageError);
}

TEST(Synth, SameSeedSameBytes) {
  for (SynthTask task : {SynthTask::kSubjectivity, SynthTask::kBias}) {
    TempDir a, b, c;
    write_synthetic_corpus(generate_synthetic_corpus(task, {17, 120}), a.path());
    write_synthetic_corpus(generate_synthetic_corpus(task, {17, 120}), b.path());
    write_synthetic_corpus(generate_synthetic_corpus(task, {18, 120}), c.path());
    const auto fa = files_of(a.path());
    EXPECT_EQ(fa.size(), 5u);
    EXPECT_EQ(fa, files_of(b.path()));
    EXPECT_NE(fa.at("train.tsv"), files_of(c.path()).at("train.tsv"));
  }
}

TEST(Synth, SubjectivityBalanceIsSixtyForty) {
  for (std::size_t n : {50u, 51u, 600u, 1049u}) {
    const auto c = generate_synthetic_corpus(SynthTask::kSubjectivity, {2, n});
    const std::size_t obj = std::count_if(c.docs.begin(), c.docs.end(),
                                          [](const auto& d) { return d.label == "OBJ"; });
    EXPECT_EQ(obj, (n * 6 + 5) / 10) << n;
    EXPECT_EQ(c.docs.size(), n);
    EXPECT_EQ(c.train_ids.size(), Fraction({66, 100}).floor_times(n));
    EXPECT_EQ(c.train_ids.size() + c.test_ids.size(), n);
  }
  const auto c = generate_synthetic_corpus(SynthTask::kSubjectivity, {2, 600});
  const auto obj = std::count_if(c.docs.begin(), c.docs.end(),
                                 [](const auto& d) { return d.label == "OBJ"; });
  EXPECT_EQ(obj, 360);
}

TEST(Synth, BiasIsOrdinalWithHeadlines) {
  const auto c = generate_synthetic_corpus(SynthTask::kBias, {2, 200});
  EXPECT_TRUE(c.labels.is_ordinal());
  EXPECT_EQ(c.labels.labels(), (std::vector<std::string>{"left", "center", "right"}));
  EXPECT_EQ(c.labels.ranks(), (std::vector<int>{0, 1, 2}));
  std::map<std::string, int> counts;
  for (const auto& d : c.docs) {
    EXPECT_FALSE(d.headline.empty());
    EXPECT_GE(d.sentences.size(), 4u);  // headline + at least three body sentences
    ++counts[d.label];
  }
  EXPECT_EQ(counts["left"], 60);
  EXPECT_EQ(counts["center"], 78);
  EXPECT_EQ(counts["right"], 62);
  const auto ds = c.dataset();
  EXPECT_EQ(ds.instances[0].text, c.docs[0].headline + "\n\n" + c.docs[0].body);
}

// The rendered text tokenizes back into exactly the gold tokens.
TEST(Synth, GoldTokensMatchTokenizer) {
  for (SynthTask task : {SynthTask::kSubjectivity, SynthTask::kBias}) {
    const auto c = generate_synthetic_corpus(task, {5, 100});
    for (const auto& d : c.docs) {
      std::vector<std::string> gold;
      for (const auto& s : d.sentences) {
        for (const auto& t : s.tokens) {
          gold.push_back(t.form);
          ASSERT_TRUE(t.pos.has_value());
        }
      }
      std::vector<std::string> seen;
      const std::string text = d.headline.empty() ? d.body : d.headline + "\n\n" + d.body;
      for (const auto& t : tokenize(text)) seen.push_back(t.form);
      ASSERT_EQ(seen, gold) << d.id;
    }
  }
}

TEST(Synth, WrittenFilesLoadCleanly) {
  TempDir t;
  const auto c = generate_synthetic_corpus(SynthTask::kBias, {9, 60});
  write_synthetic_corpus(c, t.path());
  const auto cfg = load_experiment_config(t / "experiment.ini");
  const auto train = load_dataset(t / "train.tsv", DatasetFormat::kTsv, cfg.data.schema,
                                  cfg.label_space());
  const auto test = load_dataset(t / "test.tsv", DatasetFormat::kTsv, cfg.data.schema,
                                 cfg.label_space());
  EXPECT_EQ(train.size() + test.size(), 60u);
  const auto index = group_by_instance(load_conllu(t / "annotations.conllu"));
  const auto emb = load_embeddings(t / "embeddings.txt", 16);
  for (const auto* d : {&train, &test}) {
    for (const auto& inst : d->instances) {
      EXPECT_TRUE(index.count(inst.id)) << inst.id;
      EXPECT_TRUE(emb.vectors.count(inst.id)) << inst.id;
    }
  }
  EXPECT_EQ(index.size(), 60u);
  EXPECT_EQ(emb.vectors.size(), 60u);
  EXPECT_EQ(train.instances[0].text.find("\n\n") != std::string::npos, true);
}

// Class-conditional char n-gram distributions differ: chi-squared test of
// homogeneity on the 20 most frequent n-grams, 19 degrees of freedom.
TEST(Synth, CharNgramDistributionsDiffer) {
  constexpr double kCritical = 36.191;  // chi2 quantile, df = 19, p = 0.01
  for (SynthTask task : {SynthTask::kSubjectivity, SynthTask::kBias}) {
    const auto c = generate_synthetic_corpus(task, {1, 600});
    std::vector<std::map<std::string, double>> per_class(c.labels.size());
    std::map<std::string, double> pooled;
    const Dataset all = c.dataset();
    for (const auto& inst : all.instances) {
      auto& cls = per_class[c.labels.index_of(*inst.label)];
      const auto grams = char_ngrams(inst.text, 1, 4);
      for (const auto& [sym, n] : grams.entries()) {
        cls[sym] += static_cast<double>(n);
        pooled[sym] += static_cast<double>(n);
      }
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [sym, n] : pooled) ranked.emplace_back(-n, sym);
    std::sort(ranked.begin(), ranked.end());
    ranked.resize(20);

    // Contingency table: classes x top-20 n-grams.
    std::vector<double> row(per_class.size(), 0.0), col(20, 0.0);
    double total = 0;
    for (std::size_t k = 0; k < per_class.size(); ++k) {
      for (std::size_t j = 0; j < 20; ++j) {
        const double o = per_class[k][ranked[j].second];
        row[k] += o;
        col[j] += o;
        total += o;
      }
    }
    double chi2 = 0;
    for (std::size_t k = 0; k < per_class.size(); ++k) {
      for (std::size_t j = 0; j < 20; ++j) {
        const double e = row[k] * col[j] / total;
        const double o = per_class[k][ranked[j].second];
        chi2 += (o - e) * (o - e) / e;
      }
    }
    // The 3-class table has 38 degrees of freedom; its critical value is larger.
    const double critical = per_class.size() == 2 ? kCritical : 61.162;
    EXPECT_GT(chi2, critical) << synth_task_name(task);
  }
}

// Style rates the generators are built to separate.
TEST(Synth, SubjectiveSentencesAreShorterAndMoreExclamatory) {
  const auto c = generate_synthetic_corpus(SynthTask::kSubjectivity, {1, 600});
  std::map<std::string, double> tokens, sentences, bangs, pronouns;
  for (const auto& d : c.docs) {
    for (const auto& s : d.sentences) {
      sentences[d.label] += 1;
      for (const auto& t : s.tokens) {
        tokens[d.label] += 1;
        bangs[d.label] += t.form == "!";
        pronouns[d.label] += *t.pos == "PRON";
      }
    }
  }
  EXPECT_GT(tokens["OBJ"] / sentences["OBJ"], tokens["SUBJ"] / sentences["SUBJ"]);
  EXPECT_GT(bangs["SUBJ"] / sentences["SUBJ"], 3 * bangs["OBJ"] / sentences["OBJ"]);
  EXPECT_GT(pronouns["SUBJ"] / tokens["SUBJ"], 2 * pronouns["OBJ"] / tokens["OBJ"]);
}

// data/mini is exactly what the generator produces.
TEST(Synth, BundledCorpusRegenerates) {
  const std::filesystem::path mini = std::filesystem::path(STYLO_SOURCE_DIR) / "data" / "mini";
  const std::pair<SynthTask, SynthConfig> bundled[] = {
      {SynthTask::kSubjectivity, {1, 600}},
      {SynthTask::kBias, {1, 300}},
  };
  for (const auto& [task, cfg] : bundled) {
    TempDir t;
    write_synthetic_corpus(generate_synthetic_corpus(task, cfg), t.path());
    const auto expected = files_of(mini / synth_task_name(task));
    const auto got = files_of(t.path());
    ASSERT_EQ(got.size(), expected.size());
    for (const auto& [name, bytes] : got) {
      EXPECT_TRUE(expected.count(name) && expected.at(name) == bytes)
          << name << " differs from data/mini/" << synth_task_name(task);
    }
  }
}

}  // namespace
}  // namespace stylo
