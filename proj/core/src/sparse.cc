#include "stylo/sparse.h"

#include <algorithm>
#include <string>

#include "stylo/error.h"

namespace stylo {

SparseVector::SparseVector(std::size_t dimension, std::vector<SparseEntry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].index >= dimension_) {
      throw DataError("sparse index " + std::to_string(entries_[i].index) +
                      " out of range for dimension " + std::to_string(dimension_));
    }
    if (i > 0 && entries_[i].index <= entries_[i - 1].index) {
      throw DataError("sparse indices must be strictly increasing");
    }
    if (entries_[i].value == 0.0) throw DataError("sparse vector stores an explicit zero");
  }
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector v(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    v.push_back(static_cast<std::uint32_t>(i), dense[i]);
  }
  return v;
}

void SparseVector::push_back(std::uint32_t index, double value) {
  if (index >= dimension_ || (!entries_.empty() && index <= entries_.back().index)) {
    throw DataError("sparse push_back out of order or out of range");
  }
  if (value != 0.0) entries_.push_back(SparseEntry{index, value});
}

double SparseVector::at(std::size_t index) const {
  const auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const SparseEntry& e, std::size_t i) { return e.index < i; });
  return it != entries_.end() && it->index == index ? it->value : 0.0;
}

double SparseVector::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * dense[e.index];
  return s;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return s;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> d(dimension_, 0.0);
  for (const auto& e : entries_) d[e.index] = e.value;
  return d;
}

double squared_distance(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    double diff;
    if (ib == b.end() || (ia != a.end() && ia->index < ib->index)) {
      diff = ia->value;
      ++ia;
    } else if (ia == a.end() || ib->index < ia->index) {
      diff = -ib->value;
      ++ib;
    } else {
      diff = ia->value - ib->value;
      ++ia;
      ++ib;
    }
    s += diff * diff;
  }
  return s;
}

}  // namespace stylo
