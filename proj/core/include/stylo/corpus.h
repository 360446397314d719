#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stylo {

struct Instance {
  std::string id;
  std::string text;
  std::optional<std::string> label;

  bool operator==(const Instance&) const = default;
};

// Ordered set of class labels. Label order defines label indices everywhere
// (confusion-matrix rows, classifier outputs, tie-breaks). Ordinal spaces
// carry an integer rank per label for MAE.
class LabelSpace {
 public:
  LabelSpace() = default;
  // Nominal space. Throws DataError on fewer than 2 labels or duplicates.
  explicit LabelSpace(std::vector<std::string> labels);
  // Ordinal space; ranks must be distinct.
  LabelSpace(std::vector<std::string> labels, std::vector<int> ranks);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  bool is_ordinal() const noexcept { return !ranks_.empty(); }
  const std::vector<int>& ranks() const noexcept { return ranks_; }

  const std::string& label(std::size_t index) const { return labels_.at(index); }
  std::optional<std::size_t> find(std::string_view label) const;
  // Throws DataError for labels outside the space.
  std::size_t index_of(std::string_view label) const;
  // Throws UsageError when the space is not ordinal.
  int rank(std::size_t index) const;

  bool operator==(const LabelSpace&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<int> ranks_;
};

struct Dataset {
  std::string name;
  std::vector<Instance> instances;
  LabelSpace label_space;

  std::size_t size() const noexcept { return instances.size(); }
  // Label indices of every instance; throws DataError on an unlabeled one.
  std::vector<std::size_t> label_indices() const;
};

enum class DatasetFormat { kTsv, kJsonl };

DatasetFormat parse_dataset_format(std::string_view name);

// Column (TSV) or field (JSONL) names. When `headline_field` is set, the
// instance text is "<headline>\n\n<body>" with the body taken from
// `text_field`.
struct DatasetSchema {
  std::string id_field = "id";
  std::string text_field = "text";
  std::string label_field = "label";
  std::string headline_field;
};

// Loads a dataset. Without `labels` the label space is inferred from the
// distinct labels in order of first appearance (none if the file is
// unlabeled). Throws DataError with the offending line number.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const DatasetSchema& schema = {},
                     const std::optional<LabelSpace>& labels = std::nullopt);
Dataset parse_dataset(std::istream& in, DatasetFormat format, const DatasetSchema& schema,
                      const std::optional<LabelSpace>& labels, std::string name);

// Writes id/text/label columns as TSV (escaped, header row).
void write_tsv(const Dataset& d, const std::filesystem::path& path);

// Exact rational in (0,1). Accepts "0.66" (read as 66/100) or "2/3".
struct Fraction {
  std::uint64_t numerator = 2;
  std::uint64_t denominator = 3;

  static Fraction parse(std::string_view text);
  // floor(fraction * n), computed exactly.
  std::size_t floor_times(std::size_t n) const;
  std::string to_string() const;
  bool operator==(const Fraction&) const = default;
};

struct SplitSpec {
  Fraction train_fraction;
  std::uint64_t seed = 0;
};

// Shuffles instance indices with Fisher-Yates driven by SplitMix64(seed); the
// first floor(fraction * N) shuffled positions form the train side. Both
// sides keep the input's relative order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, const SplitSpec& spec);

struct ClassShare {
  std::string label;
  std::size_t count = 0;
  double prevalence = 0.0;
};

// One entry per label in label-space order.
std::vector<ClassShare> class_distribution(const Dataset& d);

}  // namespace stylo
