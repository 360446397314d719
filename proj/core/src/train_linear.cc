#include <chrono>
#include <cmath>

#include "stylo/classifiers.h"
#include "stylo/error.h"

namespace stylo {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require_two_classes(const TrainingMatrix& m, const char* who) {
  if (m.classes_present() < 2) {
    throw DataError(std::string(who) + ": training data must contain at least 2 classes");
  }
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

double logreg_objective(const LinearParams& p, const TrainingMatrix& m, double l2,
                        LinearParams* grad) {
  const std::size_t k = p.n_classes;
  const std::size_t d = p.dimension;
  if (grad) *grad = LinearParams::zeros(k, d);
  const double inv_n = 1.0 / static_cast<double>(m.size());
  double loss = 0.0;
  std::vector<double> scores(k);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& x = m.rows[i];
    for (std::size_t c = 0; c < k; ++c) scores[c] = p.score(c, x);
    double mx = scores[0];
    for (double s : scores) mx = std::max(mx, s);
    double z = 0.0;
    for (double s : scores) z += std::exp(s - mx);
    const double lse = mx + std::log(z);
    loss += lse - scores[m.labels[i]];
    if (!grad) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double delta =
          (std::exp(scores[c] - lse) - (c == m.labels[i] ? 1.0 : 0.0)) * inv_n;
      grad->bias[c] += delta;
      double* row = &grad->weights[c * d];
      for (const auto& e : x) row[e.index] += delta * e.value;
    }
  }
  loss *= inv_n;
  double sq = 0.0;
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    sq += p.weights[j] * p.weights[j];
    if (grad) grad->weights[j] += l2 * p.weights[j];
  }
  return loss + 0.5 * l2 * sq;
}

Model train_logreg(const TrainingMatrix& m, const LogRegConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  require_two_classes(m, "logreg");
  if (cfg.epochs < 1 || !(cfg.learning_rate > 0.0) || cfg.l2 < 0.0) {
    throw UsageError("logreg: epochs >= 1, learning_rate > 0 and l2 >= 0 required");
  }
  auto p = LinearParams::zeros(m.label_space.size(), m.dimension());
  LinearParams g;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = logreg_objective(p, m, cfg.l2, &g);
    if (!std::isfinite(loss)) {
      throw NumericError("logreg: non-finite loss at epoch " + std::to_string(epoch) +
                         " (learning rate too large?)");
    }
    for (std::size_t j = 0; j < p.weights.size(); ++j) p.weights[j] -= cfg.learning_rate * g.weights[j];
    for (std::size_t c = 0; c < p.bias.size(); ++c) p.bias[c] -= cfg.learning_rate * g.bias[c];
  }
  if (!all_finite(p.weights) || !all_finite(p.bias)) {
    throw NumericError("logreg: parameters diverged");
  }
  Model model(ModelKind::kLogReg, m.label_space, m.dimension(), std::move(p));
  model.set_training_seconds(seconds_since(start));
  return model;
}

Model train_linsvm(const TrainingMatrix& m, const LinSvmConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  m.validate();
  require_two_classes(m, "linsvm");
  if (cfg.epochs < 1 || !(cfg.c > 0.0)) throw UsageError("linsvm: epochs >= 1 and C > 0 required");
  const std::size_t k = m.label_space.size();
  const std::size_t d = m.dimension();
  const std::size_t n = m.size();
  const double nd = static_cast<double>(n);
  const double lambda = 1.0 / (cfg.c * nd);
  auto p = LinearParams::zeros(k, d);
  std::vector<double> w(d);
  std::vector<double> sign(n);
  std::vector<char> violates(n);

  for (std::size_t c = 0; c < k; ++c) {
    std::fill(w.begin(), w.end(), 0.0);
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) sign[i] = m.labels[i] == c ? 1.0 : -1.0;
    for (int t = 1; t <= cfg.epochs; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        violates[i] = sign[i] * (m.rows[i].dot(w) + b) < 1.0;
      }
      const double td = static_cast<double>(t);
      const double eta = 1.0 / (lambda * td);
      const double shrink = 1.0 - eta * lambda;
      for (double& x : w) x *= shrink;
      const double step = eta / nd;
      double bias_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!violates[i]) continue;
        bias_sum += sign[i];
        for (const auto& e : m.rows[i]) w[e.index] += step * sign[i] * e.value;
      }
      b += bias_sum / (nd * std::sqrt(td));
    }
    if (!all_finite(w) || !std::isfinite(b)) {
      throw NumericError("linsvm: non-finite weights for class " + m.label_space.label(c));
    }
    std::copy(w.begin(), w.end(), p.weights.begin() + static_cast<std::ptrdiff_t>(c * d));
    p.bias[c] = b;
  }
  Model model(ModelKind::kLinSvm, m.label_space, d, std::move(p));
  model.set_training_seconds(seconds_since(start));
  return model;
}

}  // namespace stylo
