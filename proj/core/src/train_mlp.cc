#include <chrono>
#include <cmath>

#include "stylo/classifiers.h"
#include "stylo/error.h"
#include "stylo/rng.h"

namespace stylo {

MlpParams mlp_initial_params(std::size_t dimension, std::size_t hidden, std::size_t n_classes,
                             std::uint64_t seed) {
  auto p = MlpParams::zeros(dimension, hidden, n_classes);
  SplitMix64 rng(seed);
  const double s1 = std::sqrt(6.0 / static_cast<double>(dimension + hidden));
  const double s2 = std::sqrt(6.0 / static_cast<double>(hidden + n_classes));
  for (auto& w : p.w1) w = rng.uniform(-s1, s1);
  for (auto& w : p.w2) w = rng.uniform(-s2, s2);
  return p;
}

double mlp_objective(const MlpParams& p, const TrainingMatrix& m, MlpParams* grad) {
  const std::size_t h = p.hidden;
  const std::size_t k = p.n_classes;
  if (grad) *grad = MlpParams::zeros(p.dimension, h, k);
  const double inv_n = 1.0 / static_cast<double>(m.size());
  std::vector<double> z1(h);
  std::vector<double> a1(h);
  std::vector<double> z2(k);
  std::vector<double> d2(k);
  std::vector<double> d1(h);
  double loss = 0.0;

  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& x = m.rows[i];
    std::copy(p.b1.begin(), p.b1.end(), z1.begin());
    for (const auto& e : x) {
      const double* row = &p.w1[static_cast<std::size_t>(e.index) * h];
      for (std::size_t j = 0; j < h; ++j) z1[j] += e.value * row[j];
    }
    std::copy(p.b2.begin(), p.b2.end(), z2.begin());
    for (std::size_t j = 0; j < h; ++j) {
      a1[j] = z1[j] > 0.0 ? z1[j] : 0.0;
      const double* row = &p.w2[j * k];
      for (std::size_t c = 0; c < k; ++c) z2[c] += a1[j] * row[c];
    }
    double mx = z2[0];
    for (double v : z2) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : z2) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    loss += lse - z2[m.labels[i]];
    if (!grad) continue;

    for (std::size_t c = 0; c < k; ++c) {
      d2[c] = (std::exp(z2[c] - lse) - (c == m.labels[i] ? 1.0 : 0.0)) * inv_n;
      grad->b2[c] += d2[c];
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double* row = &p.w2[j * k];
      double* grow = &grad->w2[j * k];
      double back = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        grow[c] += a1[j] * d2[c];
        back += row[c] * d2[c];
      }
      d1[j] = z1[j] > 0.0 ? back : 0.0;
      grad->b1[j] += d1[j];
    }
    for (const auto& e : x) {
      double* grow = &grad->w1[static_cast<std::size_t>(e.index) * h];
      for (std::size_t j = 0; j < h; ++j) grow[j] += e.value * d1[j];
    }
  }
  return loss * inv_n;
}

Model train_mlp(const TrainingMatrix& m, const MlpConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  if (m.classes_present() < 2) throw DataError("mlp: training data must contain at least 2 classes");
  if (cfg.hidden == 0 || cfg.epochs < 1 || !(cfg.learning_rate > 0.0)) {
    throw UsageError("mlp: hidden >= 1, epochs >= 1 and learning_rate > 0 required");
  }
  auto p = mlp_initial_params(m.dimension(), cfg.hidden, m.label_space.size(), cfg.seed);
  MlpParams g;
  const auto step = [&](std::vector<double>& w, const std::vector<double>& gw) {
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg.learning_rate * gw[j];
  };
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = mlp_objective(p, m, &g);
    if (!std::isfinite(loss)) {
      throw NumericError("mlp: non-finite loss at epoch " + std::to_string(epoch) +
                         " (learning rate too large?)");
    }
    step(p.w1, g.w1);
    step(p.b1, g.b1);
    step(p.w2, g.w2);
    step(p.b2, g.b2);
  }
  if (!std::isfinite(mlp_objective(p, m, nullptr))) {
    throw NumericError("mlp: parameters diverged");
  }
  Model model(ModelKind::kMlp, m.label_space, m.dimension(), std::move(p));
  model.set_training_seconds(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return model;
}

}  // namespace stylo
