#include "cart.h"

#include <algorithm>
#include <numeric>

namespace stylo::cart {

namespace {

struct Cell {
  std::uint32_t feature;
  double value;
  std::uint32_t pos;  // position within the node sample
};

void gather(std::span<const SparseVector> rows, std::span<const std::uint32_t> sample,
            std::vector<Cell>& cells) {
  cells.clear();
  for (std::uint32_t pos = 0; pos < sample.size(); ++pos) {
    for (const auto& e : rows[sample[pos]]) cells.push_back({e.index, e.value, pos});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.feature != b.feature) return a.feature < b.feature;
    return a.value < b.value;
  });
}

struct Group {
  std::uint32_t feature;
  std::size_t begin;
  std::size_t end;
};

// Feature groups whose values (zeros included) are not all identical.
std::vector<Group> nonconstant_groups(const std::vector<Cell>& cells, std::size_t n) {
  std::vector<Group> groups;
  std::size_t a = 0;
  while (a < cells.size()) {
    std::size_t b = a;
    while (b < cells.size() && cells[b].feature == cells[a].feature) ++b;
    const bool has_zero = (b - a) < n;
    if (has_zero || cells[a].value != cells[b - 1].value) {
      groups.push_back({cells[a].feature, a, b});
    }
    a = b;
  }
  return groups;
}

std::vector<Group> select_groups(std::vector<Group> groups, const Options& opts) {
  if (!opts.max_features || *opts.max_features >= groups.size() || opts.rng == nullptr) {
    return groups;
  }
  const std::size_t k = *opts.max_features;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(opts.rng->uniform(groups.size() - i));
    std::swap(groups[i], groups[j]);
  }
  groups.resize(k);
  std::sort(groups.begin(), groups.end(),
            [](const Group& a, const Group& b) { return a.feature < b.feature; });
  return groups;
}

double midpoint(double lo, double hi) {
  double t = (lo + hi) / 2.0;
  if (t >= hi || t < lo) t = lo;
  return t;
}

// Visits the blocks of equal value of one feature group in increasing value
// order, with the implicit zeros as a single block. `on_block(value, first,
// last, is_zero)` receives the cell range [first, last) (empty for zeros).
template <typename F>
void for_each_block(const std::vector<Cell>& cells, const Group& g, std::size_t n, F&& on_block) {
  const std::size_t nnz = g.end - g.begin;
  const bool has_zero = nnz < n;
  std::size_t i = g.begin;
  bool zero_done = !has_zero;
  while (i < g.end || !zero_done) {
    if (!zero_done && (i == g.end || cells[i].value > 0.0)) {
      on_block(0.0, i, i, true);
      zero_done = true;
      continue;
    }
    std::size_t j = i;
    while (j < g.end && cells[j].value == cells[i].value) ++j;
    on_block(cells[i].value, i, j, false);
    i = j;
  }
}

struct SplitResult {
  std::int32_t feature = -1;
  double threshold = 0.0;
};

bool goes_left(const SparseVector& x, std::int32_t feature, double threshold) {
  return x.at(static_cast<std::size_t>(feature)) <= threshold;
}

class ClassificationBuilder {
 public:
  ClassificationBuilder(std::span<const SparseVector> rows, std::span<const std::size_t> labels,
                        std::size_t n_classes, const Options& opts)
      : rows_(rows), labels_(labels), k_(n_classes), opts_(opts) {}

  Tree build(std::vector<std::uint32_t> sample) {
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::uint32_t> sample, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::vector<std::int64_t> counts(k_, 0);
    for (auto r : sample) ++counts[labels_[r]];
    const std::size_t n = sample.size();
    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::int64_t c) { return c > 0; }) <= 1;
    const bool depth_stop = opts_.max_depth && depth >= *opts_.max_depth;
    SplitResult split;
    if (!pure && !depth_stop && n >= 2 * opts_.min_samples_leaf) {
      split = find_split(sample, counts);
    }
    if (split.feature < 0) {
      auto& leaf = tree_.nodes[static_cast<std::size_t>(id)];
      leaf.scores.resize(k_);
      for (std::size_t c = 0; c < k_; ++c) {
        leaf.scores[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
      }
      return id;
    }
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (auto r : sample) {
      (goes_left(rows_[r], split.feature, split.threshold) ? left : right).push_back(r);
    }
    sample.clear();
    sample.shrink_to_fit();
    const auto l = grow(std::move(left), depth + 1);
    const auto rr = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  SplitResult find_split(const std::vector<std::uint32_t>& sample,
                         const std::vector<std::int64_t>& total) {
    const std::size_t n = sample.size();
    gather(rows_, sample, cells_);
    const auto groups = select_groups(nonconstant_groups(cells_, n), opts_);

    SplitResult best;
    // Best score as the rational num/den of sum_c L_c^2/nL + sum_c R_c^2/nR.
    __int128 best_num = 0;
    __int128 best_den = 1;
    std::vector<std::int64_t> left(k_);
    std::vector<std::int64_t> nonzero(k_);
    const auto msl = static_cast<std::int64_t>(opts_.min_samples_leaf);
    const auto nn = static_cast<std::int64_t>(n);

    for (const auto& g : groups) {
      std::fill(nonzero.begin(), nonzero.end(), 0);
      for (std::size_t i = g.begin; i < g.end; ++i) ++nonzero[labels_[sample[cells_[i].pos]]];
      std::fill(left.begin(), left.end(), 0);
      std::int64_t n_left = 0;
      bool first = true;
      double prev = 0.0;
      for_each_block(cells_, g, n, [&](double value, std::size_t a, std::size_t b, bool zero) {
        if (!first && n_left >= msl && nn - n_left >= msl) {
          __int128 al = 0;
          __int128 ar = 0;
          for (std::size_t c = 0; c < k_; ++c) {
            const std::int64_t lc = left[c];
            const std::int64_t rc = total[c] - lc;
            al += static_cast<__int128>(lc) * lc;
            ar += static_cast<__int128>(rc) * rc;
          }
          const std::int64_t n_right = nn - n_left;
          const __int128 num = al * n_right + ar * n_left;
          const __int128 den = static_cast<__int128>(n_left) * n_right;
          if (best.feature < 0 || num * best_den > best_num * den) {
            best.feature = static_cast<std::int32_t>(g.feature);
            best.threshold = midpoint(prev, value);
            best_num = num;
            best_den = den;
          }
        }
        if (zero) {
          for (std::size_t c = 0; c < k_; ++c) {
            const std::int64_t zc = total[c] - nonzero[c];
            left[c] += zc;
            n_left += zc;
          }
        } else {
          for (std::size_t i = a; i < b; ++i) ++left[labels_[sample[cells_[i].pos]]];
          n_left += static_cast<std::int64_t>(b - a);
        }
        first = false;
        prev = value;
      });
    }
    return best;
  }

  std::span<const SparseVector> rows_;
  std::span<const std::size_t> labels_;
  std::size_t k_;
  Options opts_;
  Tree tree_;
  std::vector<Cell> cells_;
};

class RegressionBuilder {
 public:
  RegressionBuilder(std::span<const SparseVector> rows, std::span<const double> targets,
                    const Options& opts, const LeafValueFn& leaf_value)
      : rows_(rows), y_(targets), opts_(opts), leaf_value_(leaf_value) {}

  Tree build(std::vector<std::uint32_t> sample) {
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::uint32_t> sample, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = sample.size();
    const bool depth_stop = opts_.max_depth && depth >= *opts_.max_depth;
    SplitResult split;
    if (!depth_stop && n >= 2 * opts_.min_samples_leaf && n >= 2) split = find_split(sample);
    if (split.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(id)].scores = {leaf_value_(sample)};
      return id;
    }
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (auto r : sample) {
      (goes_left(rows_[r], split.feature, split.threshold) ? left : right).push_back(r);
    }
    const auto l = grow(std::move(left), depth + 1);
    const auto rr = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  SplitResult find_split(const std::vector<std::uint32_t>& sample) {
    const std::size_t n = sample.size();
    double total = 0.0;
    for (auto r : sample) total += y_[r];
    const double parent = total * total / static_cast<double>(n);

    gather(rows_, sample, cells_);
    const auto groups = select_groups(nonconstant_groups(cells_, n), opts_);
    SplitResult best;
    double best_score = parent;
    const std::size_t msl = opts_.min_samples_leaf;

    for (const auto& g : groups) {
      double nonzero_sum = 0.0;
      for (std::size_t i = g.begin; i < g.end; ++i) nonzero_sum += y_[sample[cells_[i].pos]];
      const std::size_t n_zero = n - (g.end - g.begin);
      double s_left = 0.0;
      std::size_t n_left = 0;
      bool first = true;
      double prev = 0.0;
      for_each_block(cells_, g, n, [&](double value, std::size_t a, std::size_t b, bool zero) {
        if (!first && n_left >= msl && n - n_left >= msl) {
          const double s_right = total - s_left;
          const double score = s_left * s_left / static_cast<double>(n_left) +
                               s_right * s_right / static_cast<double>(n - n_left);
          if (score > best_score) {
            best_score = score;
            best.feature = static_cast<std::int32_t>(g.feature);
            best.threshold = midpoint(prev, value);
          }
        }
        if (zero) {
          s_left += total - nonzero_sum;
          n_left += n_zero;
        } else {
          for (std::size_t i = a; i < b; ++i) s_left += y_[sample[cells_[i].pos]];
          n_left += b - a;
        }
        first = false;
        prev = value;
      });
    }
    return best;
  }

  std::span<const SparseVector> rows_;
  std::span<const double> y_;
  Options opts_;
  const LeafValueFn& leaf_value_;
  Tree tree_;
  std::vector<Cell> cells_;
};

}  // namespace

Tree build_classification_tree(std::span<const SparseVector> rows,
                               std::span<const std::size_t> labels, std::size_t n_classes,
                               std::vector<std::uint32_t> sample, const Options& opts) {
  return ClassificationBuilder(rows, labels, n_classes, opts).build(std::move(sample));
}

Tree build_regression_tree(std::span<const SparseVector> rows, std::span<const double> targets,
                           std::vector<std::uint32_t> sample, const Options& opts,
                           const LeafValueFn& leaf_value) {
  return RegressionBuilder(rows, targets, opts, leaf_value).build(std::move(sample));
}

}  // namespace stylo::cart
