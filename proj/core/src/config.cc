#include "stylo/config.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stylo/error.h"
#include "stylo/text_util.h"

namespace stylo {
namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '.' || c == '-';
  });
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text, std::string source) {
  KeyValueFile f;
  f.source_ = std::move(source);
  std::string section;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw UsageError(where(f.source_, line_no) + ": unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) {
        throw UsageError(where(f.source_, line_no) + ": bad section name '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(where(f.source_, line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) {
      throw UsageError(where(f.source_, line_no) + ": bad key '" + key + "'");
    }
    auto [it, fresh] = f.entries_.try_emplace({section, key});
    if (!fresh) {
      throw UsageError(where(f.source_, line_no) + ": duplicate key '" + key + "'");
    }
    it->second.value = std::string(trim(line.substr(eq + 1)));
    it->second.line = line_no;
  }
  return f;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValueFile::take(const std::string& section,
                                              const std::string& key) {
  auto it = entries_.find({section, key});
  if (it == entries_.end()) return std::nullopt;
  it->second.used = true;
  return it->second.value;
}

void KeyValueFile::reject_unused() const {
  const Entry* first = nullptr;
  std::string name;
  for (const auto& [k, e] : entries_) {
    if (e.used || (first && first->line < e.line)) continue;
    first = &e;
    name = k.first.empty() ? k.second : "[" + k.first + "] " + k.second;
  }
  if (first) throw UsageError(where(source_, first->line) + ": unknown key " + name);
}

// --- typed access -----------------------------------------------------------

namespace {

class Reader {
 public:
  Reader(KeyValueFile& f, std::filesystem::path base) : f_(f), base_(std::move(base)) {}

  void section(std::string s) { section_ = std::move(s); }

  std::optional<std::string> str(const std::string& key) { return f_.take(section_, key); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string qualified = section_.empty() ? key : "[" + section_ + "] " + key;
    throw UsageError(f_.source() + ": " + qualified + ": " + what);
  }

  template <typename T>
  void integer(const std::string& key, T& out, std::int64_t lo, std::int64_t hi) {
    auto v = str(key);
    if (!v) return;
    std::int64_t x = 0;
    if (!parse_i64(*v, x) || x < lo || x > hi) {
      fail(key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "], got '" + *v + "'");
    }
    out = static_cast<T>(x);
  }

  // Also accepts `none`.
  template <typename T>
  void integer(const std::string& key, std::optional<T>& out, std::int64_t lo, std::int64_t hi) {
    auto v = str(key);
    if (!v) return;
    if (*v == "none") {
      out.reset();
      return;
    }
    std::int64_t x = 0;
    if (!parse_i64(*v, x) || x < lo || x > hi) {
      fail(key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "] or 'none', got '" + *v + "'");
    }
    out = static_cast<T>(x);
  }

  void u64(const std::string& key, std::uint64_t& out) {
    auto v = str(key);
    if (!v) return;
    if (!parse_u64(*v, out)) fail(key, "expected an unsigned 64-bit integer, got '" + *v + "'");
  }

  void u64(const std::string& key, std::optional<std::uint64_t>& out) {
    auto v = str(key);
    if (!v) return;
    std::uint64_t x = 0;
    if (!parse_u64(*v, x)) fail(key, "expected an unsigned 64-bit integer, got '" + *v + "'");
    out = x;
  }

  void real(const std::string& key, double& out, bool positive) {
    auto v = str(key);
    if (!v) return;
    double x = 0;
    if (!parse_double(*v, x) || !std::isfinite(x) || (positive ? x <= 0 : x < 0)) {
      fail(key, std::string("expected a ") + (positive ? "positive" : "non-negative") +
                    " number, got '" + *v + "'");
    }
    out = x;
  }

  void boolean(const std::string& key, bool& out) {
    auto v = str(key);
    if (!v) return;
    if (*v == "true" || *v == "yes" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "no" || *v == "0") {
      out = false;
    } else {
      fail(key, "expected true or false, got '" + *v + "'");
    }
  }

  void path(const std::string& key, std::optional<std::filesystem::path>& out) {
    auto v = str(key);
    if (!v) return;
    if (v->empty()) fail(key, "empty path");
    out = resolve(*v);
  }

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : (base_ / q).lexically_normal();
  }

  std::vector<std::string> list(const std::string& key) {
    std::vector<std::string> out;
    auto v = str(key);
    if (!v) return out;
    for (auto item : split(*v, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list item");
      out.emplace_back(item);
    }
    return out;
  }

 private:
  KeyValueFile& f_;
  std::filesystem::path base_;
  std::string section_;
};

void read_block(Reader& r, FeatureBlock b, BlockOptions& o) {
  const std::string p = std::string(block_name(b)) + ".";
  r.integer(p + "min_df", o.min_df, 1, 1'000'000'000);
  r.integer(p + "max_features", o.max_features, 1, 1'000'000'000);
  r.boolean(p + "l2_normalize", o.l2_normalize);
  if (b == FeatureBlock::kCharBow || b == FeatureBlock::kPosBow) {
    if (auto v = r.str(p + "ngram")) {
      const auto dash = v->find('-');
      std::int64_t lo = 0, hi = 0;
      const bool ok = dash == std::string::npos
                          ? parse_i64(*v, lo) && (hi = lo, true)
                          : parse_i64(std::string_view(*v).substr(0, dash), lo) &&
                                parse_i64(std::string_view(*v).substr(dash + 1), hi);
      if (!ok || lo < 1 || hi > 4 || lo > hi) {
        r.fail(p + "ngram", "expected a range like 1-4 within 1..4, got '" + *v + "'");
      }
      o.ngram_min = static_cast<int>(lo);
      o.ngram_max = static_cast<int>(hi);
    }
  }
  if (b == FeatureBlock::kWordTfidf) r.boolean(p + "sublinear_tf", o.sublinear_tf);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir,
                                         std::string source) {
  KeyValueFile f = KeyValueFile::parse(text, std::move(source));
  Reader r(f, base_dir);
  ExperimentConfig c;
  c.source_text = std::string(text);

  auto version = r.str("config_version");
  if (!version) throw UsageError(f.source() + ": missing config_version");
  std::int64_t v = 0;
  if (!parse_i64(*version, v) || v != kConfigVersion) {
    throw UsageError(f.source() + ": unsupported config_version '" + *version +
                     "' (supported: " + std::to_string(kConfigVersion) + ")");
  }
  c.config_version = static_cast<int>(v);
  if (auto n = r.str("name")) c.name = *n;
  r.u64("seed", c.seed);
  for (const auto& s : r.list("seeds")) {
    std::uint64_t x = 0;
    if (!parse_u64(s, x)) r.fail("seeds", "bad seed '" + s + "'");
    c.seeds.push_back(x);
  }

  r.section("data");
  if (auto fmt = r.str("format")) {
    try {
      c.data.format = parse_dataset_format(*fmt);
    } catch (const std::exception& e) {
      r.fail("format", e.what());
    }
  }
  r.path("train", c.data.train);
  r.path("test", c.data.test);
  r.path("dataset", c.data.dataset);
  if (auto fr = r.str("train_fraction")) {
    try {
      c.data.train_fraction = Fraction::parse(*fr);
    } catch (const std::exception& e) {
      r.fail("train_fraction", e.what());
    }
  }
  r.u64("split_seed", c.data.split_seed);
  if (auto s = r.str("id_field")) c.data.schema.id_field = *s;
  if (auto s = r.str("text_field")) c.data.schema.text_field = *s;
  if (auto s = r.str("label_field")) c.data.schema.label_field = *s;
  if (auto s = r.str("headline_field")) c.data.schema.headline_field = *s;
  if (auto labels = r.list("labels"); !labels.empty()) c.data.labels = labels;
  r.path("annotations", c.data.annotations);
  r.path("embeddings", c.data.embeddings);
  r.integer("embedding_dim", c.features.embedding_dim, 1, 1'000'000);

  r.section("features");
  for (const auto& name : r.list("blocks")) {
    FeatureBlock b{};
    try {
      b = parse_block(name);
    } catch (const std::exception& e) {
      r.fail("blocks", e.what());
    }
    if (c.features[b].enabled) r.fail("blocks", "block '" + name + "' listed twice");
    c.features[b].enabled = true;
  }
  r.boolean("ablations", c.ablations);
  for (FeatureBlock b : kFeatureBlockOrder) read_block(r, b, c.features[b]);

  r.section("metrics");
  r.boolean("ordinal", c.metrics.ordinal);
  for (const auto& s : r.list("ranks")) {
    std::int64_t x = 0;
    if (!parse_i64(s, x)) r.fail("ranks", "bad rank '" + s + "'");
    c.metrics.ranks.push_back(static_cast<int>(x));
  }

  r.section("classifiers");
  for (const auto& name : r.list("list")) {
    ModelKind k{};
    try {
      k = parse_kind(name);
    } catch (const std::exception& e) {
      r.fail("list", e.what());
    }
    if (std::find(c.classifiers.begin(), c.classifiers.end(), k) != c.classifiers.end()) {
      r.fail("list", "classifier '" + name + "' listed twice");
    }
    c.classifiers.push_back(k);
  }
  auto& s = c.settings;
  r.integer("knn.k", s.knn_k, 1, 1'000'000);
  r.real("logreg.l2", s.logreg.l2, false);
  r.integer("logreg.epochs", s.logreg.epochs, 1, 10'000'000);
  r.real("logreg.learning_rate", s.logreg.learning_rate, true);
  r.real("linsvm.c", s.linsvm.c, true);
  r.integer("linsvm.epochs", s.linsvm.epochs, 1, 10'000'000);
  r.integer("mlp.hidden", s.mlp.hidden, 1, 1'000'000);
  r.integer("mlp.epochs", s.mlp.epochs, 1, 10'000'000);
  r.real("mlp.learning_rate", s.mlp.learning_rate, true);
  r.u64("mlp.seed", s.mlp_seed);
  r.integer("dtree.max_depth", s.dtree.max_depth, 1, 100'000);
  r.integer("dtree.min_samples_leaf", s.dtree.min_samples_leaf, 1, 1'000'000'000);
  r.integer("rforest.n_trees", s.rforest.n_trees, 1, 100'000);
  r.u64("rforest.seed", s.rforest_seed);
  r.boolean("rforest.bootstrap", s.rforest.bootstrap);
  r.integer("rforest.max_features", s.rforest.max_features, 1, 1'000'000'000);
  r.integer("rforest.max_depth", s.rforest.tree.max_depth, 1, 100'000);
  r.integer("rforest.min_samples_leaf", s.rforest.tree.min_samples_leaf, 1, 1'000'000'000);
  r.integer("gboost.n_stages", s.gboost.n_stages, 1, 100'000);
  r.real("gboost.learning_rate", s.gboost.learning_rate, true);
  r.integer("gboost.max_depth", s.gboost.max_depth, 1, 100'000);
  r.integer("gboost.min_samples_leaf", s.gboost.min_samples_leaf, 1, 1'000'000'000);

  r.section("output");
  if (auto d = r.str("dir")) {
    if (d->empty()) r.fail("dir", "empty path");
    c.output.dir = r.resolve(*d);
  } else {
    c.output.dir = r.resolve("out");
  }
  r.boolean("reproducible", c.output.reproducible);
  r.boolean("save_models", c.output.save_models);

  f.reject_unused();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_experiment_config(ss.str(), base, path.string());
}

void ExperimentConfig::validate() const {
  const bool split_pair = data.train.has_value() || data.test.has_value();
  if (split_pair && data.dataset) {
    throw UsageError("config: give either [data] train/test or [data] dataset, not both");
  }
  if (!split_pair && !data.dataset) {
    throw UsageError("config: [data] needs train and test, or dataset");
  }
  if (split_pair && !(data.train && data.test)) {
    throw UsageError("config: [data] train and test must be given together");
  }
  if (classifiers.empty()) throw UsageError("config: [classifiers] list is empty");
  if (!metrics.ranks.empty() && !metrics.ordinal) {
    throw UsageError("config: [metrics] ranks given but ordinal = false");
  }
  if (metrics.ordinal) {
    if (!data.labels) throw UsageError("config: ordinal metrics need [data] labels");
    if (!metrics.ranks.empty() && metrics.ranks.size() != data.labels->size()) {
      throw UsageError("config: [metrics] ranks must have one entry per label");
    }
  }
  if (features[FeatureBlock::kEmbedding].enabled) {
    if (!data.embeddings) throw UsageError("config: embedding block needs [data] embeddings");
    if (features.embedding_dim == 0) {
      throw UsageError("config: embedding block needs [data] embedding_dim");
    }
  }
  if (features[FeatureBlock::kMorph].enabled && !data.annotations) {
    throw UsageError("config: morph block needs [data] annotations");
  }
  features.validate();
}

std::optional<LabelSpace> ExperimentConfig::label_space() const {
  if (!data.labels) return std::nullopt;
  try {
    if (!metrics.ordinal) return LabelSpace(*data.labels);
    std::vector<int> ranks = metrics.ranks;
    if (ranks.empty()) {
      for (std::size_t i = 0; i < data.labels->size(); ++i) ranks.push_back(static_cast<int>(i));
    }
    return LabelSpace(*data.labels, ranks);
  } catch (const DataError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

void apply_feature_filter(ExperimentConfig& cfg, std::string_view names) {
  std::array<bool, 6> keep{};
  for (auto item : split(names, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const FeatureBlock b = parse_block(item);
    if (!cfg.features[b].enabled) {
      throw UsageError("--features: block '" + std::string(item) +
                       "' is not enabled in the config");
    }
    keep[static_cast<std::size_t>(b)] = true;
  }
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; })) {
    throw UsageError("--features: no blocks given");
  }
  for (FeatureBlock b : kFeatureBlockOrder) {
    cfg.features[b].enabled = keep[static_cast<std::size_t>(b)];
  }
}

void apply_classifier_filter(ExperimentConfig& cfg, std::string_view names) {
  std::vector<ModelKind> wanted;
  for (auto item : split(names, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    wanted.push_back(parse_kind(item));
  }
  if (wanted.empty()) throw UsageError("--classifiers: no classifiers given");
  for (ModelKind k : wanted) {
    if (std::find(cfg.classifiers.begin(), cfg.classifiers.end(), k) == cfg.classifiers.end()) {
      throw UsageError("--classifiers: '" + std::string(kind_name(k)) +
                       "' is not configured");
    }
  }
  std::vector<ModelKind> kept;
  for (ModelKind k : kAllModelKinds) {
    if (std::find(wanted.begin(), wanted.end(), k) != wanted.end()) kept.push_back(k);
  }
  cfg.classifiers = std::move(kept);
}

}  // namespace stylo
