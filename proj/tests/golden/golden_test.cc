// Frozen outputs of the bundled configs in reproducible mode. Set
// STYLO_UPDATE_GOLDEN=1 to rewrite tests/golden/<task>/ after an intended
// change.
#include <gtest/gtest.h>

#include <cstdlib>

#include "stylo/experiment.h"
#include "test_support.h"

namespace stylo {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::TempDir;
using testing::write_file;

const fs::path kSource = STYLO_SOURCE_DIR;

bool updating() {
  const char* v = std::getenv("STYLO_UPDATE_GOLDEN");
  return v && std::string(v) == "1";
}

// Files worth freezing: tables and reports. Models and manifests are covered
// by the determinism tests; freezing their bytes would tie the goldens to
// the compiler version string.
bool frozen(const fs::path& rel) {
  const std::string name = rel.filename().string();
  if (rel.begin()->string() == "models") return false;
  return name.ends_with("_table.txt") || name.ends_with("_table.csv") ||
         (name.starts_with("report.") && name.ends_with(".json"));
}

struct Run {
  TempDir dir;
  std::vector<ExperimentResult> results;
};

Run& run_bundled(const std::string& task) {
  static std::map<std::string, std::unique_ptr<Run>> cache;
  auto& slot = cache[task];
  if (!slot) {
    slot = std::make_unique<Run>();
    auto cfg = load_experiment_config(kSource / "data/mini" / task / "experiment.ini");
    cfg.output.reproducible = true;
    cfg.output.dir = slot->dir / "out";
    slot->results = run_and_write(cfg);
  }
  return *slot;
}

void compare_tree(const std::string& task) {
  const fs::path out = run_bundled(task).dir / "out";
  const fs::path golden = kSource / "tests/golden" / task;
  std::vector<fs::path> produced;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    const fs::path rel = fs::relative(e.path(), out);
    if (e.is_regular_file() && frozen(rel)) produced.push_back(rel);
  }
  std::sort(produced.begin(), produced.end());
  ASSERT_FALSE(produced.empty());
  if (updating()) {
    fs::remove_all(golden);
    for (const auto& rel : produced) {
      fs::create_directories((golden / rel).parent_path());
      fs::copy_file(out / rel, golden / rel);
    }
    GTEST_SKIP() << "golden files rewritten in " << golden;
  }
  std::vector<fs::path> expected;
  for (const auto& e : fs::recursive_directory_iterator(golden)) {
    if (e.is_regular_file()) expected.push_back(fs::relative(e.path(), golden));
  }
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(produced, expected);
  for (const auto& rel : produced) {
    if (fs::exists(golden / rel)) EXPECT_EQ(read_file(out / rel), read_file(golden / rel)) << rel;
  }
}

TEST(Golden, SubjectivityTree) { compare_tree("subjectivity"); }
TEST(Golden, BiasTree) { compare_tree("bias"); }

// Every non-trivial classifier beats the baseline on the full feature set.
TEST(Golden, EveryClassifierBeatsMajority) {
  for (const char* task : {"subjectivity", "bias"}) {
    const auto& all = run_bundled(task).results.at(0).sets.at(0);
    ASSERT_EQ(all.name, "all");
    ASSERT_EQ(all.runs.front().report.classifier, "majority");
    const double base = all.runs.front().report.weighted_f1;
    for (const auto& r : all.runs) {
      if (r.report.classifier != "majority") {
        EXPECT_GT(r.report.weighted_f1, base) << task << " " << r.report.classifier;
      }
      for (const char* phase : {"feature_extraction", "training", "prediction"}) {
        EXPECT_TRUE(r.report.timings.contains(phase)) << r.report.classifier << " " << phase;
      }
    }
  }
}

// Bias is ordinal: every report carries an MAE no larger than the worst case.
TEST(Golden, BiasReportsCarryMae) {
  const auto& all = run_bundled("bias").results.at(0).sets.at(0);
  for (const auto& r : all.runs) {
    ASSERT_TRUE(r.report.mae.has_value()) << r.report.classifier;
    EXPECT_GE(*r.report.mae, 0.0);
    EXPECT_LE(*r.report.mae, 2.0);
  }
}

// The data table records the split sizes the generator promises.
TEST(Golden, DataTables) {
  const auto& subj = run_bundled("subjectivity").results.at(0).sets.at(0).data;
  EXPECT_EQ(subj.n_classes, 2u);
  EXPECT_EQ(subj.n_train, 396u);  // floor(0.66 * 600)
  EXPECT_EQ(subj.n_test, 204u);
  const auto& bias = run_bundled("bias").results.at(0).sets.at(0).data;
  EXPECT_EQ(bias.n_classes, 3u);
  EXPECT_EQ(bias.n_train + bias.n_test, 300u);
}

}  // namespace
}  // namespace stylo
