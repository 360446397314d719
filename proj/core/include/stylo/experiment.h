#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/annotate.h"
#include "stylo/classifiers.h"
#include "stylo/config.h"
#include "stylo/corpus.h"
#include "stylo/eval.h"
#include "stylo/features.h"

namespace stylo {

std::string_view library_version();

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// --- results tables ----------------------------------------------------------

// Six fixed decimals.
std::string format_cell(double v);
// Smallest of <1s, <30s, <1m, <5m, <1h containing `seconds`; ">=1h" beyond.
std::string time_bucket(double seconds);

// Columns in the fixed Majority, KNN, LR, LSVM, MLP, DT, RF, GB order
// (absent classifiers are skipped). Rows: weightedf1s, accuracy,
// Training time.
struct ResultsTable {
  std::vector<std::string> columns;
  std::vector<std::string> weighted_f1;
  std::vector<std::string> accuracy;
  std::vector<std::string> training_time;

  std::string to_text() const;
  std::string to_csv() const;
  // Throws DataError on a malformed CSV.
  static ResultsTable from_csv(std::string_view csv);
  bool operator==(const ResultsTable&) const = default;
};

// Report `classifier` fields must be kind names (majority, knn, ...).
// Throws UsageError on an empty span, unknown or duplicated classifiers.
ResultsTable build_results_table(std::span<const EvaluationReport> reports);

struct DataSummary {
  std::string task;
  std::size_t n_classes = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double feature_seconds = 0.0;
};

// One-row table: task, #classes, #instances (train/test), FE. time (mins).
std::string data_table_text(const DataSummary& s);

// --- experiment data ---------------------------------------------------------

struct ExperimentData {
  Dataset train;
  Dataset test;
  std::optional<AnnotationIndex> annotations;
  std::optional<Embeddings> embeddings;

  FeatureInputs inputs() const;
};

// Loads the train side (or the single dataset, split with cfg.split_seed())
// plus annotations and embeddings. Train and test share one label space.
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

// A named PipelineConfig: "all" for every enabled block, then one per block
// when ablations are on and more than one block is enabled.
struct FeatureSet {
  std::string name;
  PipelineConfig config;
};
std::vector<FeatureSet> feature_sets(const ExperimentConfig& cfg);

// Dispatches to the trainer with the configured hyper-parameters; stochastic
// trainers use the per-classifier seed or the global one.
Model train_classifier(ModelKind kind, const TrainingMatrix& m, const ExperimentConfig& cfg);

// --- feature matrices --------------------------------------------------------

// Featurized split as written by `stylo featurize`:
//   stylo-features 1
//   dim=<D>
//   labels\t<l1>\t<l2>...
//   ranks\t<r1>\t<r2>...        (ordinal only)
//   <id>\t<label>\t<i>:<v> <i>:<v> ...
struct FeatureMatrix {
  std::vector<std::string> ids;
  TrainingMatrix matrix;
};
void write_feature_matrix(const FeatureMatrix& f, std::ostream& out);
FeatureMatrix read_feature_matrix(std::istream& in, std::string_view source = "<features>");
void save_feature_matrix(const FeatureMatrix& f, const std::filesystem::path& path);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

struct Featurized {
  FittedPipeline pipeline;
  FeatureMatrix train;
  FeatureMatrix test;
  double feature_seconds = 0.0;  // fit + transform of both sides
};

// Fits on the train side only; the test side is transformed afterwards.
Featurized featurize(const ExperimentData& data, const PipelineConfig& features);

// --- runs ----------------------------------------------------------------------

struct ClassifierRun {
  Model model;
  EvaluationReport report;
};

struct FeatureSetRun {
  std::string name;
  DataSummary data;
  std::vector<ClassifierRun> runs;  // table order
  ResultsTable table;
  FittedPipeline pipeline;
};

// Trains every configured classifier on `f.train` and evaluates on `f.test`.
// In reproducible mode every duration is recorded as 0.
FeatureSetRun run_feature_set(const Featurized& f, const ExperimentConfig& cfg,
                              std::string name);

struct ExperimentResult {
  std::uint64_t seed = 0;
  std::vector<FeatureSetRun> sets;  // "all" first
};

// Whole experiment in memory, no files touched.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Runs the experiment and writes the output tree into `cfg.output.dir`:
//   manifest.json, config.ini, data_table.txt, results_table.{txt,csv},
//   report.<clf>.{json,txt}, models/<clf>.bin, pipeline.bin,
//   ablations/<block>/{results_table.*,report.*}, ablation_table.{txt,csv}
// With several seeds each run goes to seed-<n>/ and the top-level manifest
// lists them. Files are staged in a sibling directory and renamed into place;
// on failure nothing is left behind. An existing target is replaced only if
// it holds a manifest.json from an earlier run.
std::vector<ExperimentResult> run_and_write(const ExperimentConfig& cfg);

// Writes one run's files into `dir` (which must exist). Returns the
// relative paths written, sorted.
std::vector<std::string> write_run(const ExperimentResult& r, const ExperimentConfig& cfg,
                                   const std::filesystem::path& dir);

// --- stages ------------------------------------------------------------------------
// `run` split into resumable steps. Each writes its directory atomically with
// a manifest.json.

// pipeline.bin, train.features, test.features, data_table.txt
void featurize_stage(const ExperimentConfig& cfg, const std::filesystem::path& out);
// models/<clf>.bin for every configured classifier, from train.features.
void train_stage(const ExperimentConfig& cfg, const std::filesystem::path& features_dir,
                 const std::filesystem::path& out);
// Reports and results tables for every model in `models_dir`/models on
// test.features.
void evaluate_stage(const std::filesystem::path& features_dir,
                    const std::filesystem::path& models_dir, const std::filesystem::path& out,
                    bool reproducible);

// Reports for every `report.*.json` in `dir`.
std::vector<EvaluationReport> load_reports(const std::filesystem::path& dir);

// Stages the output into `target` atomically. `fill` populates the staging
// directory it is given.
void write_atomically(const std::filesystem::path& target,
                      const std::function<void(const std::filesystem::path&)>& fill);

}  // namespace stylo
