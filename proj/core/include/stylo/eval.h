#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "stylo/corpus.h"

namespace stylo {

// Rows are true labels, columns are predictions, both in label-space order.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(LabelSpace labels);

  const LabelSpace& label_space() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::int64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_.at(truth * size() + predicted);
  }
  void add(std::size_t truth, std::size_t predicted, std::int64_t n = 1);
  std::int64_t total() const noexcept { return total_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  LabelSpace labels_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Throws DataError on length mismatch, empty input or unknown labels.
ConfusionMatrix confusion(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                          const LabelSpace& labels);
ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          const LabelSpace& labels);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

// Any 0/0 ratio is reported as 0.
std::vector<ClassMetrics> prf_per_class(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);
// Support-weighted mean of per-class F1.
double weighted_f1(const ConfusionMatrix& cm);
// Unweighted mean of per-class F1 over every label in the space.
double macro_f1(const ConfusionMatrix& cm);
// Mean |rank(true) - rank(pred)|. Throws UsageError for nominal spaces.
double mae_ordinal(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                   const LabelSpace& labels);
double mae_ordinal(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                   const LabelSpace& labels);

enum class Phase { kFeatureExtraction, kTraining, kPrediction };
std::string_view phase_name(Phase p);

struct TimingRecord {
  Phase phase;
  double wall_seconds = 0.0;
};

// Runs `thunk` and measures it with the monotonic clock.
template <typename F>
auto time_phase(Phase phase, F&& thunk) {
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return TimingRecord{
        phase, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
  };
  if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
    std::forward<F>(thunk)();
    return elapsed();
  } else {
    auto result = std::forward<F>(thunk)();
    return std::pair{std::move(result), elapsed()};
  }
}

struct EvaluationReport {
  std::string classifier;
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> mae;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  std::map<std::string, double> timings;  // phase name -> seconds

  double timing(Phase p) const;
  void set_timing(const TimingRecord& r) { timings[std::string(phase_name(r.phase))] = r.wall_seconds; }
};

// All metrics for one prediction set; MAE only for ordinal label spaces.
EvaluationReport evaluate(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          const LabelSpace& labels, std::string classifier = {});

// JSON document: accuracy, weighted_f1, macro_f1, mae, per_class.<label>.*,
// timing.<phase>_seconds, plus classifier and confusion.
std::string report_to_json(const EvaluationReport& r);
EvaluationReport report_from_json(std::string_view json);
// Flat `key=value` lines with the same key paths as the JSON document.
std::string report_to_kv(const EvaluationReport& r);

}  // namespace stylo
