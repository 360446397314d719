#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stylo {

struct SparseEntry {
  std::uint32_t index;
  double value;

  bool operator==(const SparseEntry&) const = default;
};

// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}
  // Validates ordering, bounds and non-zero values; throws DataError.
  SparseVector(std::size_t dimension, std::vector<SparseEntry> entries);

  static SparseVector from_dense(std::span<const double> dense);

  // Appends (index, value); index must exceed the last stored index. Zeros
  // are skipped.
  void push_back(std::uint32_t index, double value);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<SparseEntry>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  double at(std::size_t index) const;
  double dot(std::span<const double> dense) const;
  double squared_norm() const;
  std::vector<double> to_dense() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<SparseEntry> entries_;
};

// Sum of squared differences, accumulated in increasing index order.
double squared_distance(const SparseVector& a, const SparseVector& b);

}  // namespace stylo
