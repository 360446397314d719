#include <algorithm>
#include <chrono>

#include "stylo/classifiers.h"
#include "stylo/error.h"

namespace stylo {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Model train_majority(const TrainingMatrix& m) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  std::vector<std::size_t> counts(m.label_space.size(), 0);
  for (auto l : m.labels) ++counts[l];
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best] ||
        (counts[c] == counts[best] && m.label_space.label(c) < m.label_space.label(best))) {
      best = c;
    }
  }
  Model model(ModelKind::kMajority, m.label_space, m.dimension(), MajorityParams{best});
  model.set_training_seconds(seconds_since(start));
  return model;
}

Model train_knn(const TrainingMatrix& m, std::size_t k) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  if (k == 0) throw UsageError("knn: k must be positive");
  if (k > m.size()) {
    throw DataError("knn: k=" + std::to_string(k) + " exceeds the " + std::to_string(m.size()) +
                    " training rows");
  }
  Model model(ModelKind::kKnn, m.label_space, m.dimension(), KnnParams{k, m.rows, m.labels});
  model.set_training_seconds(seconds_since(start));
  return model;
}

}  // namespace stylo
