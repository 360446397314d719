#include "stylo/experiment.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unistd.h>

#include "stylo/error.h"
#include "stylo/text_util.h"

#ifndef STYLO_VERSION
#define STYLO_VERSION "0.0.0"
#endif

namespace stylo {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view library_version() { return STYLO_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UsageError("cannot write " + p.string());
}

// Re-throws with `context` prefixed, keeping the error category.
template <typename F>
auto with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const UsageError& e) {
    throw UsageError(context + ": " + e.what());
  }
}

// Left column left-aligned, the rest right-aligned, two-space gutters.
std::string format_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        line += r[i] + std::string(width[0] - r[i].size(), ' ');
      } else {
        line += "  " + std::string(width[i] - r[i].size(), ' ') + r[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string format_csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i].find_first_of(",\"\n") != std::string::npos) {
        throw UsageError("table cell '" + r[i] + "' needs CSV quoting");
      }
      if (i) out += ',';
      out += r[i];
    }
    out += "\n";
  }
  return out;
}

constexpr std::string_view kRowF1 = "weightedf1s";
constexpr std::string_view kRowAcc = "accuracy";
constexpr std::string_view kRowTime = "Training time";

}  // namespace

// --- tables --------------------------------------------------------------------

std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string time_bucket(double seconds) {
  if (seconds < 1.0) return "<1s";
  if (seconds < 30.0) return "<30s";
  if (seconds < 60.0) return "<1m";
  if (seconds < 300.0) return "<5m";
  if (seconds < 3600.0) return "<1h";
  return ">=1h";
}

std::string ResultsTable::to_text() const {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({""});
  rows.back().insert(rows.back().end(), columns.begin(), columns.end());
  for (auto [name, cells] : {std::pair{kRowF1, &weighted_f1}, std::pair{kRowAcc, &accuracy},
                             std::pair{kRowTime, &training_time}}) {
    rows.push_back({std::string(name)});
    rows.back().insert(rows.back().end(), cells->begin(), cells->end());
  }
  return format_grid(rows);
}

std::string ResultsTable::to_csv() const {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"metric"});
  rows.back().insert(rows.back().end(), columns.begin(), columns.end());
  for (auto [name, cells] : {std::pair{kRowF1, &weighted_f1}, std::pair{kRowAcc, &accuracy},
                             std::pair{kRowTime, &training_time}}) {
    rows.push_back({std::string(name)});
    rows.back().insert(rows.back().end(), cells->begin(), cells->end());
  }
  return format_csv(rows);
}

ResultsTable ResultsTable::from_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  for (std::string_view line : split(csv, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    for (auto c : split(line, ',')) cells.emplace_back(c);
    rows.push_back(std::move(cells));
  }
  if (rows.size() != 4) throw DataError("results CSV: expected 4 lines, got " + std::to_string(rows.size()));
  const std::string_view names[] = {"metric", kRowF1, kRowAcc, kRowTime};
  for (std::size_t i = 0; i < 4; ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw DataError("results CSV: line " + std::to_string(i + 1) + " has " +
                      std::to_string(rows[i].size()) + " cells, expected " +
                      std::to_string(rows[0].size()));
    }
    if (rows[i][0] != names[i]) {
      throw DataError("results CSV: line " + std::to_string(i + 1) + " should start with '" +
                      std::string(names[i]) + "'");
    }
  }
  ResultsTable t;
  t.columns.assign(rows[0].begin() + 1, rows[0].end());
  t.weighted_f1.assign(rows[1].begin() + 1, rows[1].end());
  t.accuracy.assign(rows[2].begin() + 1, rows[2].end());
  t.training_time.assign(rows[3].begin() + 1, rows[3].end());
  return t;
}

ResultsTable build_results_table(std::span<const EvaluationReport> reports) {
  if (reports.empty()) throw UsageError("results table needs at least one report");
  std::map<ModelKind, const EvaluationReport*> by_kind;
  for (const auto& r : reports) {
    const ModelKind k = parse_kind(r.classifier);
    if (!by_kind.emplace(k, &r).second) {
      throw UsageError("results table: classifier '" + r.classifier + "' appears twice");
    }
  }
  ResultsTable t;
  for (ModelKind k : kAllModelKinds) {
    auto it = by_kind.find(k);
    if (it == by_kind.end()) continue;
    const EvaluationReport& r = *it->second;
    t.columns.emplace_back(display_name(k));
    t.weighted_f1.push_back(format_cell(r.weighted_f1));
    t.accuracy.push_back(format_cell(r.accuracy));
    t.training_time.push_back(time_bucket(r.timing(Phase::kTraining)));
  }
  return t;
}

std::string data_table_text(const DataSummary& s) {
  char minutes[64];
  std::snprintf(minutes, sizeof minutes, "%.2f", s.feature_seconds / 60.0);
  return format_grid({{"Task", "#classes", "#instances (train)", "#instances (test)",
                       "FE. time (mins)"},
                      {s.task, std::to_string(s.n_classes), std::to_string(s.n_train),
                       std::to_string(s.n_test), minutes}});
}

// --- data ----------------------------------------------------------------------

FeatureInputs ExperimentData::inputs() const {
  FeatureInputs in;
  if (annotations) in.annotations = &*annotations;
  if (embeddings) in.embeddings = &*embeddings;
  return in;
}

ExperimentData load_experiment_data(const ExperimentConfig& cfg) {
  ExperimentData d;
  const auto labels = cfg.label_space();
  const auto& dc = cfg.data;
  if (dc.dataset) {
    Dataset all = load_dataset(*dc.dataset, dc.format, dc.schema, labels);
    auto [train, test] = train_test_split(all, SplitSpec{dc.train_fraction, cfg.split_seed()});
    d.train = std::move(train);
    d.test = std::move(test);
  } else {
    d.train = load_dataset(*dc.train, dc.format, dc.schema, labels);
    d.test = load_dataset(*dc.test, dc.format, dc.schema, d.train.label_space);
  }
  if (d.train.label_space.empty()) throw DataError("training data carries no labels");
  if (d.train.size() == 0 || d.test.size() == 0) throw DataError("empty train or test side");
  if (dc.annotations) d.annotations = group_by_instance(load_conllu(*dc.annotations));
  if (dc.embeddings) d.embeddings = load_embeddings(*dc.embeddings, cfg.features.embedding_dim);
  return d;
}

std::vector<FeatureSet> feature_sets(const ExperimentConfig& cfg) {
  std::vector<FeatureSet> out{{"all", cfg.features}};
  std::vector<FeatureBlock> enabled;
  for (FeatureBlock b : kFeatureBlockOrder) {
    if (cfg.features[b].enabled) enabled.push_back(b);
  }
  if (!cfg.ablations || enabled.size() < 2) return out;
  for (FeatureBlock b : enabled) {
    PipelineConfig only = cfg.features;
    for (FeatureBlock o : kFeatureBlockOrder) only[o].enabled = (o == b);
    out.push_back({std::string(block_name(b)), only});
  }
  return out;
}

Model train_classifier(ModelKind kind, const TrainingMatrix& m, const ExperimentConfig& cfg) {
  const auto& s = cfg.settings;
  switch (kind) {
    case ModelKind::kMajority: return train_majority(m);
    case ModelKind::kKnn: return train_knn(m, s.knn_k);
    case ModelKind::kLogReg: return train_logreg(m, s.logreg);
    case ModelKind::kLinSvm: return train_linsvm(m, s.linsvm);
    case ModelKind::kMlp: {
      MlpConfig c = s.mlp;
      c.seed = cfg.mlp_seed();
      return train_mlp(m, c);
    }
    case ModelKind::kDTree: return train_dtree(m, s.dtree);
    case ModelKind::kRForest: {
      ForestConfig c = s.rforest;
      c.seed = cfg.rforest_seed();
      return train_rforest(m, c);
    }
    case ModelKind::kGBoost: return train_gboost(m, s.gboost);
  }
  throw UsageError("unknown classifier kind");
}

// --- feature matrices ----------------------------------------------------------

void write_feature_matrix(const FeatureMatrix& f, std::ostream& out) {
  const auto& m = f.matrix;
  if (f.ids.size() != m.rows.size() || m.labels.size() != m.rows.size()) {
    throw UsageError("feature matrix: ids, rows and labels differ in length");
  }
  out << "stylo-features 1\n";
  out << "dim=" << m.dimension() << "\n";
  out << "labels";
  for (const auto& l : m.label_space.labels()) out << '\t' << tsv_escape(l);
  out << "\n";
  if (m.label_space.is_ordinal()) {
    out << "ranks";
    for (int r : m.label_space.ranks()) out << '\t' << r;
    out << "\n";
  }
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out << tsv_escape(f.ids[i]) << '\t' << tsv_escape(m.label_space.label(m.labels[i])) << '\t';
    bool first = true;
    for (const auto& e : m.rows[i]) {
      if (!first) out << ' ';
      first = false;
      out << e.index << ':' << format_double(e.value);
    }
    out << "\n";
  }
}

FeatureMatrix read_feature_matrix(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> DataError {
    return DataError(src + ":" + std::to_string(line_no) + ": " + what);
  };
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != "stylo-features 1") throw fail("not a feature file");
  std::uint64_t dim = 0;
  if (!next() || line.rfind("dim=", 0) != 0 || !parse_u64(std::string_view(line).substr(4), dim)) {
    throw fail("expected dim=<D>");
  }
  if (!next() || line.rfind("labels", 0) != 0) throw fail("expected labels line");
  std::vector<std::string> labels;
  {
    const auto cells = split(line, '\t');
    for (std::size_t i = 1; i < cells.size(); ++i) labels.push_back(tsv_unescape(cells[i]));
  }
  FeatureMatrix f;
  std::vector<int> ranks;
  bool pending = next();
  if (pending && line.rfind("ranks", 0) == 0) {
    const auto cells = split(line, '\t');
    for (std::size_t i = 1; i < cells.size(); ++i) {
      std::int64_t r = 0;
      if (!parse_i64(cells[i], r)) throw fail("bad rank '" + std::string(cells[i]) + "'");
      ranks.push_back(static_cast<int>(r));
    }
    pending = next();
  }
  try {
    f.matrix.label_space = ranks.empty() ? LabelSpace(labels) : LabelSpace(labels, ranks);
  } catch (const DataError& e) {
    throw fail(e.what());
  }
  for (; pending; pending = next()) {
    if (line.empty()) continue;
    const auto cells = split(line, '\t');
    if (cells.size() != 3) throw fail("expected id, label and features separated by tabs");
    f.ids.push_back(tsv_unescape(cells[0]));
    const auto label = f.matrix.label_space.find(tsv_unescape(cells[1]));
    if (!label) throw fail("unknown label '" + tsv_unescape(cells[1]) + "'");
    f.matrix.labels.push_back(*label);
    std::vector<SparseEntry> entries;
    for (auto item : split(cells[2], ' ')) {
      if (item.empty()) continue;
      const auto colon = item.find(':');
      std::uint64_t idx = 0;
      double v = 0;
      if (colon == std::string_view::npos || !parse_u64(item.substr(0, colon), idx) ||
          !parse_double(item.substr(colon + 1), v)) {
        throw fail("bad feature entry '" + std::string(item) + "'");
      }
      entries.push_back({static_cast<std::uint32_t>(idx), v});
    }
    try {
      f.matrix.rows.emplace_back(dim, std::move(entries));
    } catch (const DataError& e) {
      throw fail(e.what());
    }
  }
  return f;
}

void save_feature_matrix(const FeatureMatrix& f, const fs::path& path) {
  std::ostringstream out;
  write_feature_matrix(f, out);
  write_bytes(path, out.str());
}

FeatureMatrix load_feature_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return read_feature_matrix(in, path.string());
}

namespace {

FeatureMatrix to_matrix(const Dataset& d, std::vector<SparseVector> rows) {
  FeatureMatrix f;
  for (const auto& inst : d.instances) f.ids.push_back(inst.id);
  f.matrix.rows = std::move(rows);
  f.matrix.labels = d.label_indices();
  f.matrix.label_space = d.label_space;
  return f;
}

}  // namespace

Featurized featurize(const ExperimentData& data, const PipelineConfig& features) {
  Featurized out;
  const FeatureInputs inputs = data.inputs();
  const auto timing = time_phase(Phase::kFeatureExtraction, [&] {
    out.pipeline = with_context("fitting features", [&] {
      return fit_pipeline(data.train, inputs, features);
    });
    out.train = with_context("featurizing training data", [&] {
      return to_matrix(data.train, out.pipeline.transform_all(data.train, inputs));
    });
    out.test = with_context("featurizing test data", [&] {
      return to_matrix(data.test, out.pipeline.transform_all(data.test, inputs));
    });
  });
  out.feature_seconds = timing.wall_seconds;
  return out;
}

// --- runs ------------------------------------------------------------------------

FeatureSetRun run_feature_set(const Featurized& f, const ExperimentConfig& cfg,
                              std::string name) {
  FeatureSetRun run;
  run.name = std::move(name);
  const bool zero = cfg.output.reproducible;
  run.data = DataSummary{cfg.name, f.train.matrix.label_space.size(), f.train.matrix.size(),
                         f.test.matrix.size(), zero ? 0.0 : f.feature_seconds};
  for (ModelKind k : kAllModelKinds) {
    if (std::find(cfg.classifiers.begin(), cfg.classifiers.end(), k) == cfg.classifiers.end()) {
      continue;
    }
    const std::string ctx = "feature set '" + run.name + "', " + std::string(kind_name(k));
    Model model = with_context(ctx + ", training", [&] {
      return train_classifier(k, f.train.matrix, cfg);
    });
    auto [predicted, timing] = with_context(ctx + ", prediction", [&] {
      return time_phase(Phase::kPrediction,
                        [&] { return model.predict_indices(f.test.matrix.rows); });
    });
    EvaluationReport report = evaluate(f.test.matrix.labels, predicted,
                                       f.test.matrix.label_space, std::string(kind_name(k)));
    if (zero) {
      model.set_training_seconds(0.0);
      timing.wall_seconds = 0.0;
    }
    report.set_timing({Phase::kFeatureExtraction, run.data.feature_seconds});
    report.set_timing({Phase::kTraining, model.training_seconds()});
    report.set_timing(timing);
    run.runs.push_back({std::move(model), std::move(report)});
  }
  std::vector<EvaluationReport> reports;
  for (const auto& r : run.runs) reports.push_back(r.report);
  run.table = build_results_table(reports);
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.seed = cfg.seed;
  const ExperimentData data = with_context("loading data", [&] {
    return load_experiment_data(cfg);
  });
  for (const auto& set : feature_sets(cfg)) {
    const Featurized f = featurize(data, set.config);
    FeatureSetRun run = run_feature_set(f, cfg, set.name);
    run.pipeline = f.pipeline;
    result.sets.push_back(std::move(run));
  }
  return result;
}

// --- output tree -------------------------------------------------------------------

namespace {

std::string ablation_grid(const ExperimentResult& r, bool csv) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({csv ? "features" : ""});
  for (const auto& c : r.sets.front().runs) {
    rows.front().emplace_back(display_name(c.model.kind()));
  }
  for (const auto& set : r.sets) {
    rows.push_back({set.name});
    for (const auto& c : set.runs) rows.back().push_back(format_cell(c.report.weighted_f1));
  }
  return csv ? format_csv(rows) : format_grid(rows);
}

ojson input_entry(const std::optional<fs::path>& p) {
  if (!p) return nullptr;
  return ojson{{"file", p->filename().string()}, {"fnv1a64", hex64(fnv1a64(read_bytes(*p)))}};
}

ojson versions_json() {
  return ojson{{"stylo", std::string(library_version())},
               {"config_version", kConfigVersion},
               {"pipeline_format", "STYLOPIPE1"},
               {"model_format", "STYLOMDL1"},
               {"compiler", __VERSION__}};
}

void collect_files(const fs::path& root, const fs::path& dir, std::vector<std::string>& out) {
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) {
      collect_files(root, e.path(), out);
    } else {
      out.push_back(fs::relative(e.path(), root).generic_string());
    }
  }
}

ojson file_hashes(const fs::path& dir) {
  std::vector<std::string> files;
  collect_files(dir, dir, files);
  std::sort(files.begin(), files.end());
  ojson out = ojson::object();
  for (const auto& f : files) {
    if (f == "manifest.json") continue;
    out[f] = hex64(fnv1a64(read_bytes(dir / f)));
  }
  return out;
}

}  // namespace

std::vector<std::string> write_run(const ExperimentResult& r, const ExperimentConfig& cfg,
                                   const fs::path& dir) {
  if (r.sets.empty()) throw UsageError("nothing to write");
  const FeatureSetRun& main = r.sets.front();
  write_bytes(dir / "config.ini", cfg.source_text);
  write_bytes(dir / "data_table.txt", data_table_text(main.data));
  write_bytes(dir / "results_table.txt", main.table.to_text());
  write_bytes(dir / "results_table.csv", main.table.to_csv());
  main.pipeline.save(dir / "pipeline.bin");
  if (cfg.output.save_models) fs::create_directories(dir / "models");
  for (const auto& c : main.runs) {
    const std::string k(kind_name(c.model.kind()));
    write_bytes(dir / ("report." + k + ".json"), report_to_json(c.report));
    write_bytes(dir / ("report." + k + ".txt"), report_to_kv(c.report));
    if (cfg.output.save_models) persist_model(c.model, dir / "models" / (k + ".bin"));
  }
  if (r.sets.size() > 1) {
    write_bytes(dir / "ablation_table.txt", ablation_grid(r, false));
    write_bytes(dir / "ablation_table.csv", ablation_grid(r, true));
    for (std::size_t i = 1; i < r.sets.size(); ++i) {
      const auto& set = r.sets[i];
      const fs::path sub = dir / "ablations" / set.name;
      fs::create_directories(sub);
      write_bytes(sub / "data_table.txt", data_table_text(set.data));
      write_bytes(sub / "results_table.txt", set.table.to_text());
      write_bytes(sub / "results_table.csv", set.table.to_csv());
      for (const auto& c : set.runs) {
        write_bytes(sub / ("report." + std::string(kind_name(c.model.kind())) + ".json"),
                    report_to_json(c.report));
      }
    }
  }

  ojson m;
  m["name"] = cfg.name;
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(cfg.source_text));
  m["seed"] = r.seed;
  m["split_seed"] = cfg.data.dataset ? ojson(cfg.split_seed()) : ojson(nullptr);
  m["mlp_seed"] = cfg.mlp_seed();
  m["rforest_seed"] = cfg.rforest_seed();
  m["reproducible"] = cfg.output.reproducible;
  m["versions"] = versions_json();
  m["inputs"] = ojson{{"train", input_entry(cfg.data.train)},
                      {"test", input_entry(cfg.data.test)},
                      {"dataset", input_entry(cfg.data.dataset)},
                      {"annotations", input_entry(cfg.data.annotations)},
                      {"embeddings", input_entry(cfg.data.embeddings)}};
  ojson sets = ojson::array();
  for (const auto& s : r.sets) sets.push_back(s.name);
  m["feature_sets"] = sets;
  ojson clfs = ojson::array();
  for (const auto& c : main.runs) clfs.push_back(std::string(kind_name(c.model.kind())));
  m["classifiers"] = clfs;
  m["files"] = file_hashes(dir);
  write_bytes(dir / "manifest.json", m.dump(2) + "\n");

  std::vector<std::string> files;
  collect_files(dir, dir, files);
  std::sort(files.begin(), files.end());
  return files;
}

void write_atomically(const fs::path& target_in,
                      const std::function<void(const fs::path&)>& fill) {
  fs::path target = fs::absolute(target_in).lexically_normal();
  if (target.filename().empty()) target = target.parent_path();
  if (fs::exists(target)) {
    if (!fs::is_directory(target)) {
      throw UsageError("output path " + target.string() + " exists and is not a directory");
    }
    if (!fs::is_empty(target) && !fs::exists(target / "manifest.json")) {
      throw UsageError("refusing to overwrite " + target.string() +
                       ": not empty and not a previous run");
    }
  }
  fs::create_directories(target.parent_path());
  const std::string tag = "." + target.filename().string() + ".";
  const std::string pid = std::to_string(::getpid());
  const fs::path staging = target.parent_path() / (tag + "staging-" + pid);
  const fs::path old = target.parent_path() / (tag + "old-" + pid);
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    fill(staging);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  if (fs::exists(target)) {
    fs::remove_all(old);
    fs::rename(target, old);
    fs::rename(staging, target);
    fs::remove_all(old);
  } else {
    fs::rename(staging, target);
  }
}

std::vector<ExperimentResult> run_and_write(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty()) seeds.push_back(cfg.seed);
  std::vector<ExperimentResult> results;
  for (std::uint64_t s : seeds) {
    ExperimentConfig c = cfg;
    c.seed = s;
    results.push_back(run_experiment(c));
  }
  write_atomically(cfg.output.dir, [&](const fs::path& dir) {
    if (results.size() == 1) {
      ExperimentConfig c = cfg;
      c.seed = seeds.front();
      write_run(results.front(), c, dir);
      return;
    }
    ojson runs = ojson::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      ExperimentConfig c = cfg;
      c.seed = seeds[i];
      const std::string sub = "seed-" + std::to_string(seeds[i]);
      fs::create_directories(dir / sub);
      write_run(results[i], c, dir / sub);
      runs.push_back(ojson{{"seed", seeds[i]},
                           {"dir", sub},
                           {"manifest_fnv1a64",
                            hex64(fnv1a64(read_bytes(dir / sub / "manifest.json")))}});
    }
    ojson m;
    m["name"] = cfg.name;
    m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(cfg.source_text));
    m["seeds"] = seeds;
    m["versions"] = versions_json();
    m["runs"] = runs;
    write_bytes(dir / "manifest.json", m.dump(2) + "\n");
  });
  return results;
}

// --- stages ----------------------------------------------------------------------

namespace {

void write_stage_manifest(const fs::path& dir, ojson m) {
  m["versions"] = versions_json();
  m["files"] = file_hashes(dir);
  write_bytes(dir / "manifest.json", m.dump(2) + "\n");
}

ojson read_manifest(const fs::path& dir, std::string_view stage) {
  const fs::path p = dir / "manifest.json";
  ojson m;
  try {
    m = ojson::parse(read_bytes(p));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed " + p.string() + ": " + e.what());
  }
  if (!m.is_object() || m.value("stage", "") != stage) {
    throw DataError(p.string() + " is not a " + std::string(stage) + " manifest");
  }
  return m;
}

void require_distinct(const fs::path& out, const fs::path& in) {
  std::error_code ec;
  if (fs::weakly_canonical(out, ec) == fs::weakly_canonical(in, ec)) {
    throw UsageError("output directory " + out.string() + " would replace input " + in.string());
  }
}

}  // namespace

void featurize_stage(const ExperimentConfig& cfg, const fs::path& out) {
  const ExperimentData data = with_context("loading data", [&] {
    return load_experiment_data(cfg);
  });
  Featurized f = featurize(data, cfg.features);
  if (cfg.output.reproducible) f.feature_seconds = 0.0;
  write_atomically(out, [&](const fs::path& dir) {
    f.pipeline.save(dir / "pipeline.bin");
    save_feature_matrix(f.train, dir / "train.features");
    save_feature_matrix(f.test, dir / "test.features");
    const DataSummary summary{cfg.name, f.train.matrix.label_space.size(), f.train.matrix.size(),
                              f.test.matrix.size(), f.feature_seconds};
    write_bytes(dir / "data_table.txt", data_table_text(summary));
    write_stage_manifest(dir, ojson{{"stage", "featurize"},
                                    {"name", cfg.name},
                                    {"config_hash", "fnv1a64:" + hex64(fnv1a64(cfg.source_text))},
                                    {"seed", cfg.seed},
                                    {"reproducible", cfg.output.reproducible},
                                    {"feature_seconds", f.feature_seconds}});
  });
}

void train_stage(const ExperimentConfig& cfg, const fs::path& features_dir, const fs::path& out) {
  require_distinct(out, features_dir);
  read_manifest(features_dir, "featurize");
  const FeatureMatrix train = load_feature_matrix(features_dir / "train.features");
  std::vector<Model> models;
  for (ModelKind k : kAllModelKinds) {
    if (std::find(cfg.classifiers.begin(), cfg.classifiers.end(), k) == cfg.classifiers.end()) {
      continue;
    }
    Model m = with_context("training " + std::string(kind_name(k)), [&] {
      return train_classifier(k, train.matrix, cfg);
    });
    if (cfg.output.reproducible) m.set_training_seconds(0.0);
    models.push_back(std::move(m));
  }
  write_atomically(out, [&](const fs::path& dir) {
    fs::create_directories(dir / "models");
    ojson names = ojson::array();
    for (const auto& m : models) {
      const std::string k(kind_name(m.kind()));
      persist_model(m, dir / "models" / (k + ".bin"));
      names.push_back(k);
    }
    write_stage_manifest(dir, ojson{{"stage", "train"},
                                    {"name", cfg.name},
                                    {"config_hash", "fnv1a64:" + hex64(fnv1a64(cfg.source_text))},
                                    {"seed", cfg.seed},
                                    {"mlp_seed", cfg.mlp_seed()},
                                    {"rforest_seed", cfg.rforest_seed()},
                                    {"reproducible", cfg.output.reproducible},
                                    {"classifiers", names}});
  });
}

void evaluate_stage(const fs::path& features_dir, const fs::path& models_dir, const fs::path& out,
                    bool reproducible) {
  require_distinct(out, features_dir);
  require_distinct(out, models_dir);
  const ojson fm = read_manifest(features_dir, "featurize");
  const ojson mm = read_manifest(models_dir, "train");
  const FeatureMatrix test = load_feature_matrix(features_dir / "test.features");
  const double fe = reproducible ? 0.0 : fm.value("feature_seconds", 0.0);
  std::vector<EvaluationReport> reports;
  for (const auto& name : mm.at("classifiers")) {
    const std::string k = name.get<std::string>();
    const Model model = load_model(models_dir / "models" / (k + ".bin"));
    if (!(model.label_space() == test.matrix.label_space)) {
      throw DataError("model " + k + " was trained on a different label space");
    }
    auto [predicted, timing] = with_context("predicting with " + k, [&] {
      return time_phase(Phase::kPrediction, [&] { return model.predict_indices(test.matrix.rows); });
    });
    EvaluationReport r = evaluate(test.matrix.labels, predicted, test.matrix.label_space, k);
    if (reproducible) timing.wall_seconds = 0.0;
    r.set_timing({Phase::kFeatureExtraction, fe});
    r.set_timing({Phase::kTraining, reproducible ? 0.0 : model.training_seconds()});
    r.set_timing(timing);
    reports.push_back(std::move(r));
  }
  const ResultsTable table = build_results_table(reports);
  write_atomically(out, [&](const fs::path& dir) {
    for (const auto& r : reports) {
      write_bytes(dir / ("report." + r.classifier + ".json"), report_to_json(r));
      write_bytes(dir / ("report." + r.classifier + ".txt"), report_to_kv(r));
    }
    write_bytes(dir / "results_table.txt", table.to_text());
    write_bytes(dir / "results_table.csv", table.to_csv());
    write_stage_manifest(dir, ojson{{"stage", "evaluate"},
                                    {"name", fm.value("name", "")},
                                    {"reproducible", reproducible}});
  });
}

std::vector<EvaluationReport> load_reports(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n.rfind("report.", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no report.*.json files in " + dir.string());
  std::vector<EvaluationReport> out;
  for (const auto& f : files) {
    out.push_back(with_context(f.filename().string(), [&] {
      return report_from_json(read_bytes(f));
    }));
  }
  return out;
}

}  // namespace stylo
