#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stylo/error.h"
#include "stylo/experiment.h"
#include "stylo/synth.h"
#include "stylo/text_util.h"
#include "test_support.h"

namespace stylo {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

EvaluationReport fake_report(std::string clf, double wf1, double acc, double train_s) {
  EvaluationReport r;
  r.classifier = std::move(clf);
  r.weighted_f1 = wf1;
  r.accuracy = acc;
  r.set_timing({Phase::kTraining, train_s});
  return r;
}

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(1), "0000000000000001");
}

TEST(Cells, SixDecimals) {
  EXPECT_EQ(format_cell(0.7695984), "0.769598");
  EXPECT_EQ(format_cell(0.459866), "0.459866");
  EXPECT_EQ(format_cell(0.38927), "0.389270");
  EXPECT_EQ(format_cell(1.0), "1.000000");
  EXPECT_EQ(format_cell(0.0), "0.000000");
}

TEST(Cells, TimeBuckets) {
  EXPECT_EQ(time_bucket(0.4), "<1s");
  EXPECT_EQ(time_bucket(200.0), "<5m");
  EXPECT_EQ(time_bucket(0.0), "<1s");
  EXPECT_EQ(time_bucket(0.999), "<1s");
  EXPECT_EQ(time_bucket(1.0), "<30s");
  EXPECT_EQ(time_bucket(29.9), "<30s");
  EXPECT_EQ(time_bucket(30.0), "<1m");
  EXPECT_EQ(time_bucket(59.99), "<1m");
  EXPECT_EQ(time_bucket(60.0), "<5m");
  EXPECT_EQ(time_bucket(299.0), "<5m");
  EXPECT_EQ(time_bucket(300.0), "<1h");
  EXPECT_EQ(time_bucket(3599.0), "<1h");
  EXPECT_EQ(time_bucket(3600.0), ">=1h");
}

TEST(Cells, BucketIsSmallestContainingBound) {
  const std::pair<double, std::string> bounds[] = {
      {1.0, "<1s"}, {30.0, "<30s"}, {60.0, "<1m"}, {300.0, "<5m"}, {3600.0, "<1h"}};
  SplitMix64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double t = std::exp(rng.uniform(-5.0, 9.0));
    std::string expected = ">=1h";
    for (const auto& [bound, name] : bounds) {
      if (t < bound) {
        expected = name;
        break;
      }
    }
    EXPECT_EQ(time_bucket(t), expected) << t;
  }
}

TEST(ResultsTable, FixedColumnOrder) {
  std::vector<EvaluationReport> reports;
  const char* shuffled[] = {"gboost", "mlp", "majority", "rforest", "knn", "dtree", "linsvm",
                            "logreg"};
  for (const char* k : shuffled) reports.push_back(fake_report(k, 0.5, 0.5, 0.1));
  const auto t = build_results_table(reports);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"Majority", "KNN", "LR", "LSVM", "MLP", "DT",
                                                 "RF", "GB"}));
  EXPECT_EQ(t.weighted_f1.size(), 8u);
  EXPECT_EQ(t.accuracy.size(), 8u);
  EXPECT_EQ(t.training_time.size(), 8u);
}

TEST(ResultsTable, SubsetAndErrors) {
  std::vector<EvaluationReport> reports{fake_report("gboost", 0.7695984, 0.772334, 40.0),
                                        fake_report("majority", 0.459866, 0.608069, 0.4)};
  const auto t = build_results_table(reports);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"Majority", "GB"}));
  EXPECT_EQ(t.weighted_f1, (std::vector<std::string>{"0.459866", "0.769598"}));
  EXPECT_EQ(t.accuracy, (std::vector<std::string>{"0.608069", "0.772334"}));
  EXPECT_EQ(t.training_time, (std::vector<std::string>{"<1s", "<1m"}));

  EXPECT_THROW(build_results_table({}), UsageError);
  reports.push_back(fake_report("majority", 0.1, 0.1, 0.1));
  EXPECT_THROW(build_results_table(reports), UsageError);
  std::vector<EvaluationReport> unknown{fake_report("svm", 0.1, 0.1, 0.1)};
  EXPECT_THROW(build_results_table(unknown), UsageError);
}

TEST(ResultsTable, TextLayout) {
  std::vector<EvaluationReport> reports{fake_report("majority", 0.459866, 0.608069, 0.2),
                                        fake_report("mlp", 0.682075, 0.688761, 12.0)};
  EXPECT_EQ(build_results_table(reports).to_text(),
            "               Majority       MLP\n"
            "weightedf1s    0.459866  0.682075\n"
            "accuracy       0.608069  0.688761\n"
            "Training time       <1s      <30s\n");
  EXPECT_EQ(build_results_table(reports).to_csv(),
            "metric,Majority,MLP\n"
            "weightedf1s,0.459866,0.682075\n"
            "accuracy,0.608069,0.688761\n"
            "Training time,<1s,<30s\n");
}

TEST(ResultsTable, CsvRoundTripsToSixDecimals) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvaluationReport> reports;
    for (ModelKind k : kAllModelKinds) {
      if (rng.uniform01() < 0.3) continue;
      reports.push_back(fake_report(std::string(kind_name(k)), rng.uniform01(), rng.uniform01(),
                                    std::exp(rng.uniform(-4.0, 9.0))));
    }
    if (reports.empty()) continue;
    const auto table = build_results_table(reports);
    const auto parsed = ResultsTable::from_csv(table.to_csv());
    ASSERT_EQ(parsed, table);
    for (std::size_t i = 0; i < parsed.columns.size(); ++i) {
      const auto& r = *std::find_if(reports.begin(), reports.end(), [&](const auto& r) {
        return display_name(parse_kind(r.classifier)) == parsed.columns[i];
      });
      double wf1 = 0, acc = 0;
      ASSERT_TRUE(parse_double(parsed.weighted_f1[i], wf1));
      ASSERT_TRUE(parse_double(parsed.accuracy[i], acc));
      EXPECT_LE(std::abs(wf1 - r.weighted_f1), 5e-7 + 1e-15);
      EXPECT_LE(std::abs(acc - r.accuracy), 5e-7 + 1e-15);
      EXPECT_EQ(parsed.training_time[i], time_bucket(r.timing(Phase::kTraining)));
    }
  }
}

TEST(ResultsTable, MalformedCsv) {
  EXPECT_THROW(ResultsTable::from_csv(""), DataError);
  EXPECT_THROW(ResultsTable::from_csv("metric,A\nweightedf1s,1\naccuracy,1\n"), DataError);
  EXPECT_THROW(ResultsTable::from_csv("metric,A\nweightedf1s,1\naccuracy\nTraining time,<1s\n"),
               DataError);
  EXPECT_THROW(ResultsTable::from_csv("x,A\nweightedf1s,1\naccuracy,1\nTraining time,<1s\n"),
               DataError);
}

TEST(DataTable, Layout) {
  EXPECT_EQ(data_table_text({"Task 2", 2, 702, 347, 84.0}),
            "Task    #classes  #instances (train)  #instances (test)  FE. time (mins)\n"
            "Task 2         2                 702                347             1.40\n");
}

// --- feature files ---------------------------------------------------------------

FeatureMatrix small_matrix(bool ordinal) {
  FeatureMatrix f;
  f.ids = {"a", "b\tc"};
  f.matrix.label_space = ordinal ? LabelSpace({"lo", "hi"}, {0, 5}) : LabelSpace({"x", "y"});
  f.matrix.rows.emplace_back(4, std::vector<SparseEntry>{{0, 0.1}, {3, -2.5e-300}});
  f.matrix.rows.emplace_back(4);
  f.matrix.labels = {1, 0};
  return f;
}

TEST(FeatureFile, RoundTripIsExact) {
  for (bool ordinal : {false, true}) {
    const auto f = small_matrix(ordinal);
    std::stringstream ss;
    write_feature_matrix(f, ss);
    const auto back = read_feature_matrix(ss);
    EXPECT_EQ(back.ids, f.ids);
    EXPECT_EQ(back.matrix.rows, f.matrix.rows);
    EXPECT_EQ(back.matrix.labels, f.matrix.labels);
    EXPECT_EQ(back.matrix.label_space, f.matrix.label_space);
  }
}

TEST(FeatureFile, Errors) {
  auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_feature_matrix(in, "f");
      ADD_FAILURE() << "no error for " << text;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  fails("hello\n", "f:1: not a feature file");
  fails("stylo-features 1\ndim=x\n", "f:2: expected dim");
  fails("stylo-features 1\ndim=3\nlabels\ta\tb\nr\tc\t0:1\n", "f:4: unknown label 'c'");
  fails("stylo-features 1\ndim=3\nlabels\ta\tb\nr\ta\t0=1\n", "bad feature entry");
  fails("stylo-features 1\ndim=3\nlabels\ta\tb\nr\ta\t5:1\n", "f:4:");
  fails("stylo-features 1\ndim=3\nlabels\ta\tb\nr\ta\n", "expected id, label and features");
}

// --- experiments on a small synthetic corpus --------------------------------------

constexpr const char* kSmallConfig = R"(config_version = 1
name = small
seed = 4

[data]
train = train.tsv
test = test.tsv
labels = OBJ,SUBJ
annotations = annotations.conllu
embeddings = embeddings.txt
embedding_dim = 16

[features]
blocks = word_bow,char_bow,morph,embedding
char_bow.ngram = 1-2
word_bow.l2_normalize = true
char_bow.l2_normalize = true
morph.l2_normalize = true

[classifiers]
list = majority,knn,logreg,dtree,gboost
gboost.n_stages = 5

[output]
reproducible = true
)";

class SmallExperiment : public ::testing::Test {
 protected:
  void SetUp() override {
    write_synthetic_corpus(generate_synthetic_corpus(SynthTask::kSubjectivity, {3, 80}),
                           dir_.path());
  }
  ExperimentConfig config(const std::string& extra = "") {
    write_file(dir_ / "x.ini", std::string(kSmallConfig) + extra);
    return load_experiment_config(dir_ / "x.ini");
  }
  TempDir dir_;
};

TEST_F(SmallExperiment, FeatureSets) {
  auto c = config();
  auto sets = feature_sets(c);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].name, "all");
  c.ablations = true;
  sets = feature_sets(c);
  std::vector<std::string> names;
  for (const auto& s : sets) names.push_back(s.name);
  EXPECT_EQ(names, (std::vector<std::string>{"all", "word_bow", "char_bow", "morph", "embedding"}));
  for (std::size_t i = 1; i < sets.size(); ++i) {
    int enabled = 0;
    for (FeatureBlock b : kFeatureBlockOrder) enabled += sets[i].config[b].enabled;
    EXPECT_EQ(enabled, 1);
    EXPECT_TRUE(sets[i].config[parse_block(sets[i].name)].enabled);
  }
  apply_feature_filter(c, "char_bow");
  EXPECT_EQ(feature_sets(c).size(), 1u);
}

TEST_F(SmallExperiment, ReproducibleRunsAreIdentical) {
  const auto c = config();
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  ASSERT_EQ(a.sets.size(), 1u);
  const auto& ra = a.sets[0].runs;
  const auto& rb = b.sets[0].runs;
  ASSERT_EQ(ra.size(), 5u);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(report_to_json(ra[i].report), report_to_json(rb[i].report));
    EXPECT_EQ(ra[i].model, rb[i].model);
    EXPECT_EQ(ra[i].model.training_seconds(), 0.0);
    for (const char* phase : {"feature_extraction", "training", "prediction"}) {
      ASSERT_TRUE(ra[i].report.timings.count(phase)) << phase;
      EXPECT_EQ(ra[i].report.timings.at(phase), 0.0);
    }
  }
  EXPECT_EQ(a.sets[0].table.columns, (std::vector<std::string>{"Majority", "KNN", "LR", "DT", "GB"}));
  EXPECT_EQ(a.sets[0].data.n_train + a.sets[0].data.n_test, 80u);
}

TEST_F(SmallExperiment, WallClockModeRecordsEveryPhase) {
  auto c = config();
  c.output.reproducible = false;
  apply_classifier_filter(c, "majority,gboost");
  const auto r = run_experiment(c);
  for (const auto& run : r.sets[0].runs) {
    EXPECT_GT(run.report.timing(Phase::kFeatureExtraction), 0.0);
    EXPECT_GE(run.report.timing(Phase::kTraining), 0.0);
    EXPECT_EQ(run.report.timing(Phase::kTraining), run.model.training_seconds());
    EXPECT_GE(run.report.timing(Phase::kPrediction), 0.0);
  }
}

TEST_F(SmallExperiment, PipelineNeverSeesTestData) {
  const auto c = config();
  const ExperimentData data = load_experiment_data(c);
  const Featurized f = featurize(data, c.features);
  std::ostringstream with_test;
  f.pipeline.write(with_test);

  // Same fit with the test file gone.
  std::filesystem::remove(dir_ / "test.tsv");
  const Dataset train_only = load_dataset(*c.data.train, DatasetFormat::kTsv, {}, c.label_space());
  const FittedPipeline alone = fit_pipeline(train_only, data.inputs(), c.features);
  std::ostringstream without_test;
  alone.write(without_test);
  EXPECT_EQ(with_test.str(), without_test.str());
  EXPECT_EQ(f.train.matrix.rows, alone.transform_all(train_only, data.inputs()));
}

TEST_F(SmallExperiment, SingleDatasetIsSplitWithSplitSeed) {
  const auto c = config();
  const auto data = load_experiment_data(c);
  Dataset all = data.train;
  all.instances.insert(all.instances.end(), data.test.instances.begin(), data.test.instances.end());
  write_tsv(all, dir_ / "all.tsv");
  std::string text(kSmallConfig);
  text.replace(text.find("train = train.tsv\ntest = test.tsv\n"),
               std::string("train = train.tsv\ntest = test.tsv\n").size(),
               "dataset = all.tsv\ntrain_fraction = 0.5\nsplit_seed = 12\n");
  write_file(dir_ / "y.ini", text);
  const auto cs = load_experiment_config(dir_ / "y.ini");
  const auto split = load_experiment_data(cs);
  const auto [tr, te] = train_test_split(load_dataset(dir_ / "all.tsv", DatasetFormat::kTsv, {},
                                                      cs.label_space()),
                                         {{1, 2}, 12});
  EXPECT_EQ(split.train.instances, tr.instances);
  EXPECT_EQ(split.test.instances, te.instances);
  EXPECT_EQ(split.train.size(), 40u);
}

TEST_F(SmallExperiment, MissingInputsAreDataErrors) {
  std::filesystem::remove(dir_ / "embeddings.txt");
  EXPECT_THROW(run_experiment(config()), DataError);
}

TEST_F(SmallExperiment, ErrorsNamePhase) {
  auto c = config("[classifiers]\nlogreg.learning_rate = 1e300\n");
  apply_classifier_filter(c, "logreg");
  try {
    run_experiment(c);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("feature set 'all', logreg, training"),
              std::string::npos)
        << e.what();
  }
}

TEST_F(SmallExperiment, WrittenTree) {
  std::string text(kSmallConfig);
  text.replace(text.find("[features]\n"), 11, "[features]\nablations = true\n");
  write_file(dir_ / "x.ini", text);
  auto c = load_experiment_config(dir_ / "x.ini");
  c.output.dir = dir_ / "out";
  run_and_write(c);
  const auto out = dir_ / "out";
  for (const char* f : {"manifest.json", "config.ini", "data_table.txt", "results_table.txt",
                        "results_table.csv", "pipeline.bin", "ablation_table.txt",
                        "ablation_table.csv", "report.majority.json", "report.majority.txt",
                        "models/gboost.bin", "ablations/morph/results_table.txt",
                        "ablations/morph/report.knn.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  EXPECT_EQ(read_file(out / "config.ini"), text);
  const auto manifest = read_file(out / "manifest.json");
  EXPECT_NE(manifest.find("\"config_hash\": \"fnv1a64:" + hex64(fnv1a64(text)) + "\""),
            std::string::npos);
  EXPECT_NE(manifest.find("\"results_table.txt\": \"" +
                          hex64(fnv1a64(read_file(out / "results_table.txt"))) + "\""),
            std::string::npos);

  const auto model = load_model(out / "models/gboost.bin");
  EXPECT_EQ(model.kind(), ModelKind::kGBoost);
  const auto reports = load_reports(out);
  EXPECT_EQ(reports.size(), 5u);
  EXPECT_EQ(build_results_table(reports).to_text(), read_file(out / "results_table.txt"));
  const auto ablation = read_file(out / "ablation_table.txt");
  EXPECT_EQ(ablation.substr(0, ablation.find('\n')).find("Majority") != std::string::npos, true);
  EXPECT_EQ(std::count(ablation.begin(), ablation.end(), '\n'), 6);

  // Rewriting over a previous run is allowed and byte-identical.
  const std::string before = read_file(out / "manifest.json");
  run_and_write(c);
  EXPECT_EQ(read_file(out / "manifest.json"), before);
}

TEST_F(SmallExperiment, MultiSeedLayout) {
  auto c = config();
  apply_classifier_filter(c, "majority,logreg");
  c.seeds = {5, 6};
  c.output.dir = dir_ / "multi";
  const auto results = run_and_write(c);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].seed, 5u);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "multi/seed-5/results_table.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "multi/seed-6/models/logreg.bin"));
  const auto top = read_file(dir_ / "multi/manifest.json");
  EXPECT_NE(top.find("\"dir\": \"seed-6\""), std::string::npos);
  EXPECT_NE(read_file(dir_ / "multi/seed-5/manifest.json").find("\"mlp_seed\": 5"),
            std::string::npos);
}

TEST_F(SmallExperiment, StagesMatchRun) {
  auto c = config();
  const auto run = run_experiment(c);
  featurize_stage(c, dir_ / "f");
  train_stage(c, dir_ / "f", dir_ / "m");
  evaluate_stage(dir_ / "f", dir_ / "m", dir_ / "e", true);
  for (const auto& r : run.sets[0].runs) {
    const std::string k(kind_name(r.model.kind()));
    EXPECT_EQ(read_file(dir_ / "e" / ("report." + k + ".json")), report_to_json(r.report)) << k;
    EXPECT_EQ(load_model(dir_ / "m" / "models" / (k + ".bin")), r.model) << k;
  }
  EXPECT_EQ(read_file(dir_ / "e/results_table.txt"), run.sets[0].table.to_text());
  std::ostringstream pipe;
  run.sets[0].pipeline.write(pipe);
  EXPECT_EQ(read_file(dir_ / "f/pipeline.bin"), pipe.str());

  EXPECT_THROW(train_stage(c, dir_ / "m", dir_ / "m2"), DataError);  // not a featurize dir
  EXPECT_THROW(evaluate_stage(dir_ / "f", dir_ / "m", dir_ / "m", true), UsageError);
}

// --- atomic output --------------------------------------------------------------

TEST(AtomicOutput, RefusesForeignDirectories) {
  TempDir t;
  std::filesystem::create_directories(t / "out");
  write_file(t / "out" / "precious.txt", "keep");
  EXPECT_THROW(write_atomically(t / "out", [](const auto&) {}), UsageError);
  EXPECT_EQ(read_file(t / "out" / "precious.txt"), "keep");
  write_file(t / "file", "x");
  EXPECT_THROW(write_atomically(t / "file", [](const auto&) {}), UsageError);
}

TEST(AtomicOutput, FailureLeavesNothingBehind) {
  TempDir t;
  EXPECT_THROW(write_atomically(t / "out",
                                [](const std::filesystem::path& d) {
                                  write_file(d / "half.txt", "x");
                                  throw DataError("boom");
                                }),
               DataError);
  EXPECT_FALSE(std::filesystem::exists(t / "out"));
  EXPECT_TRUE(std::filesystem::is_empty(t.path()));
}

TEST(AtomicOutput, ReplacesPreviousRun) {
  TempDir t;
  std::filesystem::create_directories(t / "out");
  write_file(t / "out" / "manifest.json", "{}");
  write_file(t / "out" / "stale.txt", "old");
  write_atomically(t / "out/", [](const std::filesystem::path& d) {
    write_file(d / "manifest.json", "{\"new\": true}");
  });
  EXPECT_FALSE(std::filesystem::exists(t / "out" / "stale.txt"));
  EXPECT_EQ(read_file(t / "out" / "manifest.json"), "{\"new\": true}");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(t.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Reports, LoadErrors) {
  TempDir t;
  EXPECT_THROW(load_reports(t / "missing"), DataError);
  EXPECT_THROW(load_reports(t.path()), DataError);
  write_file(t / "report.knn.json", "{");
  try {
    load_reports(t.path());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("report.knn.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace stylo
