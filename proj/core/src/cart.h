#pragma once

// CART construction over sparse rows. Split search gathers the node's
// non-zero cells, sorts them by (feature, value) and sweeps each feature with
// the implicit zeros inserted as one block between negative and positive
// values, so dense materialisation is never needed.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stylo/classifiers.h"
#include "stylo/rng.h"

namespace stylo::cart {

struct Options {
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
  // Random subset of the node's non-constant features; needs `rng`.
  std::optional<std::size_t> max_features;
  SplitMix64* rng = nullptr;
};

// `sample` lists row indices (duplicates allowed for bootstrap draws). Leaf
// scores are class frequencies.
Tree build_classification_tree(std::span<const SparseVector> rows,
                               std::span<const std::size_t> labels, std::size_t n_classes,
                               std::vector<std::uint32_t> sample, const Options& opts);

using LeafValueFn = std::function<double(std::span<const std::uint32_t> sample)>;

// Variance-reduction splits on `targets`; each leaf holds one value computed
// by `leaf_value` over the rows reaching it.
Tree build_regression_tree(std::span<const SparseVector> rows, std::span<const double> targets,
                           std::vector<std::uint32_t> sample, const Options& opts,
                           const LeafValueFn& leaf_value);

}  // namespace stylo::cart
