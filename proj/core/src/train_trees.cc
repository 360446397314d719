#include <chrono>
#include <cmath>

#include "cart.h"
#include "stylo/classifiers.h"
#include "stylo/error.h"
#include "stylo/parallel.h"
#include "stylo/rng.h"

namespace stylo {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<std::uint32_t>(i);
  return s;
}

std::size_t ceil_sqrt(std::size_t d) {
  std::size_t k = static_cast<std::size_t>(std::sqrt(static_cast<double>(d)));
  while (k * k < d) ++k;
  while (k > 0 && (k - 1) * (k - 1) >= d) --k;
  return std::max<std::size_t>(k, 1);
}

void check_tree_config(const TreeConfig& cfg) {
  if (cfg.min_samples_leaf == 0) throw UsageError("min_samples_leaf must be >= 1");
  if (cfg.max_depth && *cfg.max_depth == 0) throw UsageError("max_depth must be >= 1");
}

}  // namespace

Model train_dtree(const TrainingMatrix& m, const TreeConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  check_tree_config(cfg);
  cart::Options opts;
  opts.max_depth = cfg.max_depth;
  opts.min_samples_leaf = cfg.min_samples_leaf;
  auto tree = cart::build_classification_tree(m.rows, m.labels, m.label_space.size(),
                                              all_rows(m.size()), opts);
  Model model(ModelKind::kDTree, m.label_space, m.dimension(), TreeParams{std::move(tree)});
  model.set_training_seconds(seconds_since(start));
  return model;
}

Model train_rforest(const TrainingMatrix& m, const ForestConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  check_tree_config(cfg.tree);
  if (cfg.n_trees == 0) throw UsageError("rforest: n_trees must be >= 1");
  if (cfg.max_features && *cfg.max_features == 0) throw UsageError("rforest: max_features must be >= 1");
  const std::size_t n = m.size();
  const std::size_t features = cfg.max_features.value_or(ceil_sqrt(m.dimension()));

  ForestParams forest;
  forest.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, [&](std::size_t t) {
    SplitMix64 rng(cfg.seed + t);
    std::vector<std::uint32_t> sample;
    if (cfg.bootstrap) {
      sample.resize(n);
      for (auto& s : sample) s = static_cast<std::uint32_t>(rng.uniform(n));
    } else {
      sample = all_rows(n);
    }
    cart::Options opts;
    opts.max_depth = cfg.tree.max_depth;
    opts.min_samples_leaf = cfg.tree.min_samples_leaf;
    opts.max_features = features;
    opts.rng = &rng;
    forest.trees[t] = cart::build_classification_tree(m.rows, m.labels, m.label_space.size(),
                                                      std::move(sample), opts);
  });
  Model model(ModelKind::kRForest, m.label_space, m.dimension(), std::move(forest));
  model.set_training_seconds(seconds_since(start));
  return model;
}

Model train_gboost(const TrainingMatrix& m, const GBoostConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  if (m.classes_present() < 2) throw DataError("gboost: training data must contain at least 2 classes");
  if (cfg.n_stages == 0) throw UsageError("gboost: n_stages must be >= 1");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) {
    throw UsageError("gboost: learning_rate must lie in (0, 1]");
  }
  if (cfg.max_depth == 0 || cfg.min_samples_leaf == 0) {
    throw UsageError("gboost: max_depth and min_samples_leaf must be >= 1");
  }
  const std::size_t n = m.size();
  const std::size_t k = m.label_space.size();

  BoostParams boost;
  boost.learning_rate = cfg.learning_rate;
  boost.n_stages = cfg.n_stages;
  boost.initial.assign(k, 0.0);
  {
    std::vector<double> counts(k, 0.0);
    for (auto l : m.labels) counts[l] += 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      boost.initial[c] = std::log(std::max(counts[c] / static_cast<double>(n), 1e-12));
    }
  }
  std::vector<double> f(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(boost.initial.begin(), boost.initial.end(), f.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  std::vector<double> prob(n * k);
  const auto refresh = [&] {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = std::span<const double>(f).subspan(i * k, k);
      const auto p = softmax(row);
      std::copy(p.begin(), p.end(), prob.begin() + static_cast<std::ptrdiff_t>(i * k));
      double mx = row[0];
      for (double v : row) mx = std::max(mx, v);
      double z = 0.0;
      for (double v : row) z += std::exp(v - mx);
      loss += mx + std::log(z) - row[m.labels[i]];
    }
    return loss / static_cast<double>(n);
  };
  boost.stage_loss.push_back(refresh());

  cart::Options opts;
  opts.max_depth = cfg.max_depth;
  opts.min_samples_leaf = cfg.min_samples_leaf;
  std::vector<std::vector<double>> residuals(k, std::vector<double>(n));
  std::vector<Tree> stage_trees(k);

  for (std::size_t s = 0; s < cfg.n_stages; ++s) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        residuals[c][i] = (m.labels[i] == c ? 1.0 : 0.0) - prob[i * k + c];
      }
    }
    parallel_for(k, [&](std::size_t c) {
      const auto& r = residuals[c];
      const cart::LeafValueFn leaf = [&r](std::span<const std::uint32_t> rows) {
        double num = 0.0;
        double den = 0.0;
        for (auto i : rows) {
          const double a = std::abs(r[i]);
          num += r[i];
          den += a * (1.0 - a);
        }
        return num / std::max(den, 1e-8);
      };
      stage_trees[c] = cart::build_regression_tree(m.rows, r, all_rows(n), opts, leaf);
    });
    for (std::size_t c = 0; c < k; ++c) {
      for (const auto& node : stage_trees[c].nodes) {
        if (node.is_leaf() && !std::isfinite(node.scores[0])) {
          throw NumericError("gboost: non-finite leaf value at stage " + std::to_string(s));
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        f[i * k + c] += cfg.learning_rate * stage_trees[c].leaf_scores(m.rows[i])[0];
      }
      boost.trees.push_back(std::move(stage_trees[c]));
    }
    boost.stage_loss.push_back(refresh());
  }
  Model model(ModelKind::kGBoost, m.label_space, m.dimension(), std::move(boost));
  model.set_training_seconds(seconds_since(start));
  return model;
}

}  // namespace stylo
