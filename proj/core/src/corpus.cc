#include "stylo/corpus.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stylo/error.h"
#include "stylo/rng.h"
#include "stylo/text_util.h"

namespace stylo {

namespace {

void check_distinct(const std::vector<std::string>& labels) {
  if (labels.size() < 2) {
    throw DataError("label space needs at least 2 labels, got " + std::to_string(labels.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw DataError("empty label in label space");
    if (!seen.insert(l).second) throw DataError("duplicate label '" + l + "' in label space");
  }
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  check_distinct(labels_);
}

LabelSpace::LabelSpace(std::vector<std::string> labels, std::vector<int> ranks)
    : labels_(std::move(labels)), ranks_(std::move(ranks)) {
  check_distinct(labels_);
  if (ranks_.size() != labels_.size()) {
    throw DataError("ordinal label space needs one rank per label");
  }
  std::unordered_set<int> seen;
  for (int r : ranks_) {
    if (!seen.insert(r).second) throw DataError("ordinal ranks must be distinct");
  }
}

std::optional<std::size_t> LabelSpace::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

std::size_t LabelSpace::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw DataError("unknown label '" + std::string(label) + "'");
}

int LabelSpace::rank(std::size_t index) const {
  if (!is_ordinal()) throw UsageError("label space is not ordinal");
  return ranks_.at(index);
}

std::vector<std::size_t> Dataset::label_indices() const {
  std::vector<std::size_t> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    if (!inst.label) throw DataError("instance '" + inst.id + "' has no label");
    out.push_back(label_space.index_of(*inst.label));
  }
  return out;
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "tsv") return DatasetFormat::kTsv;
  if (name == "jsonl") return DatasetFormat::kJsonl;
  throw UsageError("unknown dataset format '" + std::string(name) + "' (expected tsv or jsonl)");
}

namespace {

struct RawRecord {
  std::size_t line = 0;
  std::string id;
  std::string text;
  std::optional<std::string> label;
};

std::string join_headline(std::string headline, const std::string& body) {
  if (headline.empty()) return body;
  headline += "\n\n";
  headline += body;
  return headline;
}

std::vector<RawRecord> read_tsv(std::istream& in, const DatasetSchema& schema) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return records;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, '\t');
  const auto column = [&](const std::string& name, bool required) -> std::ptrdiff_t {
    if (name.empty()) return -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    }
    if (required) throw DataError("line 1: missing column '" + name + "' in header");
    return -1;
  };
  const auto id_col = column(schema.id_field, true);
  const auto text_col = column(schema.text_field, true);
  const auto label_col = column(schema.label_field, false);
  const auto head_col = column(schema.headline_field, !schema.headline_field.empty());

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, '\t');
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    RawRecord r;
    r.line = line_no;
    r.id = tsv_unescape(cells[static_cast<std::size_t>(id_col)]);
    std::string body = tsv_unescape(cells[static_cast<std::size_t>(text_col)]);
    r.text = head_col >= 0
                 ? join_headline(tsv_unescape(cells[static_cast<std::size_t>(head_col)]), body)
                 : std::move(body);
    if (label_col >= 0) {
      std::string label = tsv_unescape(cells[static_cast<std::size_t>(label_col)]);
      if (!label.empty()) r.label = std::move(label);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RawRecord> read_jsonl(std::istream& in, const DatasetSchema& schema) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  const auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
  const auto string_field = [&](const nlohmann::json& obj, const std::string& key,
                                bool required) -> std::optional<std::string> {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) throw DataError(where() + "missing field '" + key + "'");
      return std::nullopt;
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return it->dump();
    throw DataError(where() + "field '" + key + "' is not a string");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where() + "invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError(where() + "expected a JSON object");
    RawRecord r;
    r.line = line_no;
    r.id = *string_field(obj, schema.id_field, true);
    std::string body = *string_field(obj, schema.text_field, true);
    if (!schema.headline_field.empty()) {
      r.text = join_headline(string_field(obj, schema.headline_field, true).value(), body);
    } else {
      r.text = std::move(body);
    }
    if (!schema.label_field.empty()) {
      auto label = string_field(obj, schema.label_field, false);
      if (label && !label->empty()) r.label = std::move(label);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

Dataset parse_dataset(std::istream& in, DatasetFormat format, const DatasetSchema& schema,
                      const std::optional<LabelSpace>& labels, std::string name) {
  auto records = format == DatasetFormat::kTsv ? read_tsv(in, schema) : read_jsonl(in, schema);
  if (records.empty()) throw DataError(name + ": no instances");

  Dataset d;
  d.name = std::move(name);
  std::unordered_set<std::string> ids;
  std::vector<std::string> seen_labels;
  std::unordered_set<std::string> seen_label_set;
  for (auto& r : records) {
    const auto where = "line " + std::to_string(r.line) + ": ";
    if (r.id.empty()) throw DataError(where + "empty id");
    if (!ids.insert(r.id).second) throw DataError(where + "duplicate id '" + r.id + "'");
    if (trim(r.text).empty()) throw DataError(where + "empty text for id '" + r.id + "'");
    if (r.label) {
      if (labels) {
        if (!labels->find(*r.label)) {
          throw DataError(where + "unknown label '" + *r.label + "'");
        }
      } else if (seen_label_set.insert(*r.label).second) {
        seen_labels.push_back(*r.label);
      }
    }
    d.instances.push_back(Instance{std::move(r.id), std::move(r.text), std::move(r.label)});
  }
  if (labels) {
    d.label_space = *labels;
  } else if (!seen_labels.empty()) {
    d.label_space = LabelSpace(std::move(seen_labels));
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const DatasetSchema& schema, const std::optional<LabelSpace>& labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return parse_dataset(in, format, schema, labels, path.filename().string());
}

void write_tsv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id\ttext\tlabel\n";
  for (const auto& inst : d.instances) {
    out << tsv_escape(inst.id) << '\t' << tsv_escape(inst.text) << '\t'
        << tsv_escape(inst.label.value_or("")) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Fraction Fraction::parse(std::string_view text) {
  text = trim(text);
  Fraction f;
  const auto bad = [&] {
    return UsageError("invalid fraction '" + std::string(text) + "'");
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    if (!parse_u64(text.substr(0, slash), f.numerator) ||
        !parse_u64(text.substr(slash + 1), f.denominator)) {
      throw bad();
    }
  } else {
    const auto dot = text.find('.');
    if (dot == std::string_view::npos || dot + 1 >= text.size() || text.size() - dot - 1 > 18) {
      throw bad();
    }
    std::uint64_t whole = 0;
    if (dot > 0 && !parse_u64(text.substr(0, dot), whole)) throw bad();
    const auto frac = text.substr(dot + 1);
    if (!parse_u64(frac, f.numerator)) throw bad();
    f.denominator = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) f.denominator *= 10;
    f.numerator += whole * f.denominator;
  }
  if (f.denominator == 0 || f.numerator == 0 || f.numerator >= f.denominator) {
    throw UsageError("train fraction must lie strictly between 0 and 1, got '" +
                     std::string(text) + "'");
  }
  return f;
}

std::size_t Fraction::floor_times(std::size_t n) const {
  const auto prod = static_cast<unsigned __int128>(numerator) * n;
  return static_cast<std::size_t>(prod / denominator);
}

std::string Fraction::to_string() const {
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, const SplitSpec& spec) {
  const std::size_t n = d.size();
  if (n < 2) throw DataError("cannot split a dataset with fewer than 2 instances");
  if (spec.train_fraction.denominator == 0 ||
      spec.train_fraction.numerator == 0 ||
      spec.train_fraction.numerator >= spec.train_fraction.denominator) {
    throw UsageError("train fraction must lie strictly between 0 and 1");
  }
  const std::size_t n_train = spec.train_fraction.floor_times(n);
  if (n_train == 0 || n_train == n) {
    throw DataError("split of " + std::to_string(n) + " instances at " +
                    spec.train_fraction.to_string() + " leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(spec.seed);
  shuffle(std::span<std::size_t>(order), rng);

  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  Dataset train{d.name + ".train", {}, d.label_space};
  Dataset test{d.name + ".test", {}, d.label_space};
  train.instances.reserve(n_train);
  test.instances.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : test).instances.push_back(d.instances[i]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<ClassShare> class_distribution(const Dataset& d) {
  std::vector<ClassShare> out;
  for (const auto& l : d.label_space.labels()) out.push_back(ClassShare{l, 0, 0.0});
  for (const auto& inst : d.instances) {
    if (!inst.label) throw DataError("instance '" + inst.id + "' has no label");
    ++out[d.label_space.index_of(*inst.label)].count;
  }
  const auto total = static_cast<double>(d.size());
  for (auto& s : out) s.prevalence = total > 0 ? static_cast<double>(s.count) / total : 0.0;
  return out;
}

}  // namespace stylo
