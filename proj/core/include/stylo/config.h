#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/classifiers.h"
#include "stylo/corpus.h"
#include "stylo/features.h"

namespace stylo {

// Flat key-value text with `[section]` headers. Keys before the first header
// live in the "" section. '#' and ';' start comment lines. Every key must be
// consumed by the caller; leftovers are reported as unknown.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, std::string source = "<config>");
  static KeyValueFile load(const std::filesystem::path& path);

  // Marks the key as used.
  std::optional<std::string> take(const std::string& section, const std::string& key);
  // Throws UsageError naming the first key nobody asked for.
  void reject_unused() const;
  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
    bool used = false;
  };
  std::map<std::pair<std::string, std::string>, Entry> entries_;
  std::string source_;
};

inline constexpr int kConfigVersion = 1;

struct DataConfig {
  DatasetFormat format = DatasetFormat::kTsv;
  DatasetSchema schema;
  // Either explicit train/test files or one dataset plus a split fraction.
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> dataset;
  Fraction train_fraction{66, 100};
  std::optional<std::uint64_t> split_seed;  // defaults to the global seed
  std::optional<std::vector<std::string>> labels;
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> embeddings;
};

struct MetricsConfig {
  bool ordinal = false;
  std::vector<int> ranks;  // one per label when ordinal
};

struct ClassifierSettings {
  std::size_t knn_k = 5;
  LogRegConfig logreg;
  LinSvmConfig linsvm;
  MlpConfig mlp;
  std::optional<std::uint64_t> mlp_seed;
  TreeConfig dtree;
  ForestConfig rforest;
  std::optional<std::uint64_t> rforest_seed;
  GBoostConfig gboost;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  // Zero every measured duration so reruns are byte-identical.
  bool reproducible = false;
  bool save_models = true;
};

struct ExperimentConfig {
  int config_version = kConfigVersion;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // extra runs; empty means {seed}
  DataConfig data;
  PipelineConfig features;
  // Also run every enabled feature family on its own.
  bool ablations = false;
  MetricsConfig metrics;
  std::vector<ModelKind> classifiers;
  ClassifierSettings settings;
  OutputConfig output;
  // Exact bytes of the config file, hashed into the manifest.
  std::string source_text;

  // Throws UsageError on structural problems (both or neither data source,
  // ranks without ordinal, empty classifier list, ...).
  void validate() const;
  // Label space implied by [data] labels and [metrics]; nullopt = infer.
  std::optional<LabelSpace> label_space() const;
  std::uint64_t mlp_seed() const { return settings.mlp_seed.value_or(seed); }
  std::uint64_t rforest_seed() const { return settings.rforest_seed.value_or(seed); }
  std::uint64_t split_seed() const { return data.split_seed.value_or(seed); }
};

// Relative paths resolve against `base_dir` (the config file's directory).
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir,
                                         std::string source = "<config>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Restricts the enabled feature blocks to `names` (comma list). Naming a block
// the config does not enable is a UsageError.
void apply_feature_filter(ExperimentConfig& cfg, std::string_view names);
// Keeps the listed classifiers (which must be configured), in table order.
void apply_classifier_filter(ExperimentConfig& cfg, std::string_view names);

}  // namespace stylo
