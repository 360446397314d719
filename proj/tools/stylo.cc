// stylo: command-line front end for the stylometric classification toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "stylo/config.h"
#include "stylo/corpus.h"
#include "stylo/error.h"
#include "stylo/experiment.h"
#include "stylo/synth.h"
#include "stylo/text_util.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct DatasetArgs {
  fs::path in;
  std::string format = "tsv";
  stylo::DatasetSchema schema;
  std::string labels;

  void attach(CLI::App* app) {
    app->add_option("--in", in, "Input dataset")->required();
    app->add_option("--format", format, "tsv or jsonl")->capture_default_str();
    app->add_option("--id-field", schema.id_field)->capture_default_str();
    app->add_option("--text-field", schema.text_field)->capture_default_str();
    app->add_option("--label-field", schema.label_field)->capture_default_str();
    app->add_option("--headline-field", schema.headline_field,
                    "Optional headline column, prepended to the text");
    app->add_option("--labels", labels, "Comma-separated label order (default: as seen)");
  }

  stylo::Dataset load() const {
    std::optional<stylo::LabelSpace> ls;
    if (!labels.empty()) {
      std::vector<std::string> names;
      for (auto l : stylo::split(labels, ',')) names.emplace_back(stylo::trim(l));
      ls = stylo::LabelSpace(names);
    }
    return stylo::load_dataset(in, stylo::parse_dataset_format(format), schema, ls);
  }
};

struct ExperimentArgs {
  fs::path config;
  std::optional<std::uint64_t> seed;
  std::string classifiers;
  std::string features;
  bool reproducible = false;

  void attach(CLI::App* app, bool filters) {
    app->add_option("--config", config, "Experiment config file")->required();
    app->add_option("--seed", seed, "Global seed (overrides the config)");
    if (filters) {
      app->add_option("--classifiers", classifiers, "Subset of configured classifiers");
      app->add_option("--features", features, "Subset of configured feature blocks");
    }
    app->add_flag("--reproducible", reproducible, "Record every duration as 0");
  }

  stylo::ExperimentConfig load() const {
    auto cfg = stylo::load_experiment_config(config);
    if (seed) {
      cfg.seed = *seed;
      cfg.seeds.clear();
    }
    if (!classifiers.empty()) stylo::apply_classifier_filter(cfg, classifiers);
    if (!features.empty()) stylo::apply_feature_filter(cfg, features);
    if (reproducible) cfg.output.reproducible = true;
    return cfg;
  }
};

void print_distribution(const stylo::Dataset& d) {
  std::cout << d.name << ": " << d.size() << " instances\n";
  for (const auto& c : stylo::class_distribution(d)) {
    std::cout << "  " << c.label << '\t' << c.count << '\t' << stylo::format_cell(c.prevalence)
              << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stylometric text classification: features, classifiers, evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(stylo::library_version()));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and print its class balance");
  DatasetArgs ingest_args;
  ingest_args.attach(ingest);
  fs::path ingest_out;
  ingest->add_option("--out", ingest_out, "Write the normalised id/text/label TSV here");

  // split
  auto* split = app.add_subcommand("split", "Seeded train/test split");
  DatasetArgs split_args;
  split_args.attach(split);
  std::string fraction = "0.66";
  std::uint64_t split_seed = 0;
  fs::path split_out;
  split->add_option("--fraction", fraction, "Train share, e.g. 0.66 or 2/3")->capture_default_str();
  split->add_option("--seed", split_seed)->capture_default_str();
  split->add_option("--out", split_out, "Directory for train.tsv and test.tsv")->required();

  // featurize / train / evaluate
  auto* featurize = app.add_subcommand("featurize", "Fit the feature pipeline on the train side");
  ExperimentArgs feat_args;
  feat_args.attach(featurize, true);
  fs::path feat_out;
  featurize->add_option("--out", feat_out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train the configured classifiers");
  ExperimentArgs train_args;
  train_args.attach(train, true);
  fs::path train_in, train_out;
  train->add_option("--in", train_in, "Directory written by featurize")->required();
  train->add_option("--out", train_out, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score trained models on the test side");
  fs::path eval_features, eval_models, eval_out;
  bool eval_reproducible = false;
  evaluate->add_option("--features", eval_features, "Directory written by featurize")->required();
  evaluate->add_option("--models", eval_models, "Directory written by train")->required();
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  evaluate->add_flag("--reproducible", eval_reproducible, "Record every duration as 0");

  // run
  auto* run = app.add_subcommand("run", "End-to-end experiment from a config file");
  ExperimentArgs run_args;
  run_args.attach(run, true);
  std::optional<fs::path> run_out;
  std::vector<std::uint64_t> run_seeds;
  run->add_option("--out", run_out, "Output directory (overrides the config)");
  run->add_option("--seeds", run_seeds, "Run once per seed, into seed-<n>/")->delimiter(',');
  run->get_option("--seed")->excludes(run->get_option("--seeds"));

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the synthetic mini-corpus");
  std::string synth_task = "both";
  stylo::SynthConfig synth_cfg;
  fs::path synth_out;
  synth->add_option("--task", synth_task, "subjectivity, bias or both")->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();
  synth->add_option("--n", synth_cfg.n, "Documents per task (>= 50)")->capture_default_str();
  synth->add_option("--embedding-dim", synth_cfg.embedding_dim)->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Rebuild the results table from report JSON files");
  fs::path report_in;
  bool report_csv = false;
  report->add_option("--in", report_in, "Directory holding report.*.json")->required();
  report->add_flag("--csv", report_csv, "Emit CSV instead of the aligned table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      const auto d = ingest_args.load();
      print_distribution(d);
      if (!ingest_out.empty()) stylo::write_tsv(d, ingest_out);
    } else if (split->parsed()) {
      const auto d = split_args.load();
      const auto [tr, te] =
          stylo::train_test_split(d, {stylo::Fraction::parse(fraction), split_seed});
      fs::create_directories(split_out);
      stylo::write_tsv(tr, split_out / "train.tsv");
      stylo::write_tsv(te, split_out / "test.tsv");
      std::cout << "train " << tr.size() << ", test " << te.size() << '\n';
    } else if (featurize->parsed()) {
      stylo::featurize_stage(feat_args.load(), feat_out);
      std::cout << (feat_out / "data_table.txt").string() << '\n';
    } else if (train->parsed()) {
      stylo::train_stage(train_args.load(), train_in, train_out);
    } else if (evaluate->parsed()) {
      stylo::evaluate_stage(eval_features, eval_models, eval_out, eval_reproducible);
      std::cout << stylo::build_results_table(stylo::load_reports(eval_out)).to_text();
    } else if (run->parsed()) {
      auto cfg = run_args.load();
      if (run_out) cfg.output.dir = *run_out;
      if (!run_seeds.empty()) cfg.seeds = run_seeds;
      const auto results = stylo::run_and_write(cfg);
      for (const auto& r : results) {
        if (results.size() > 1) std::cout << "seed " << r.seed << '\n';
        std::cout << r.sets.front().table.to_text();
      }
    } else if (synth->parsed()) {
      auto emit = [&](stylo::SynthTask t, const fs::path& dir) {
        stylo::write_synthetic_corpus(stylo::generate_synthetic_corpus(t, synth_cfg), dir);
        std::cout << dir.string() << '\n';
      };
      if (synth_task == "both") {
        emit(stylo::SynthTask::kSubjectivity, synth_out / "subjectivity");
        emit(stylo::SynthTask::kBias, synth_out / "bias");
      } else {
        emit(stylo::parse_synth_task(synth_task), synth_out);
      }
    } else if (report->parsed()) {
      const auto table = stylo::build_results_table(stylo::load_reports(report_in));
      std::cout << (report_csv ? table.to_csv() : table.to_text());
    }
  } catch (const stylo::UsageError& e) {
    std::cerr << "stylo: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const stylo::DataError& e) {
    std::cerr << "stylo: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "stylo: error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
