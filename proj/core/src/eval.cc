#include "stylo/eval.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stylo/error.h"
#include "stylo/text_util.h"

namespace stylo {

ConfusionMatrix::ConfusionMatrix(LabelSpace labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::int64_t n) {
  if (truth >= size() || predicted >= size()) throw DataError("label index outside confusion matrix");
  counts_[truth * size() + predicted] += n;
  total_ += n;
}

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DataError("y_true has " + std::to_string(a) + " labels but y_pred has " +
                    std::to_string(b));
  }
  if (a == 0) throw DataError("cannot evaluate an empty prediction set");
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          const LabelSpace& labels) {
  check_lengths(y_true.size(), y_pred.size());
  ConfusionMatrix cm(labels);
  for (std::size_t i = 0; i < y_true.size(); ++i) cm.add(y_true[i], y_pred[i]);
  return cm;
}

ConfusionMatrix confusion(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                          const LabelSpace& labels) {
  check_lengths(y_true.size(), y_pred.size());
  ConfusionMatrix cm(labels);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    cm.add(labels.index_of(y_true[i]), labels.index_of(y_pred[i]));
  }
  return cm;
}

std::vector<ClassMetrics> prf_per_class(const ConfusionMatrix& cm) {
  const std::size_t k = cm.size();
  std::vector<ClassMetrics> out;
  out.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t predicted = 0;
    std::int64_t actual = 0;
    for (std::size_t j = 0; j < k; ++j) {
      predicted += cm.at(j, c);
      actual += cm.at(c, j);
    }
    const auto tp = static_cast<double>(cm.at(c, c));
    ClassMetrics m;
    m.label = cm.label_space().label(c);
    m.precision = ratio(tp, static_cast<double>(predicted));
    m.recall = ratio(tp, static_cast<double>(actual));
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    m.support = actual;
    out.push_back(std::move(m));
  }
  return out;
}

double accuracy(const ConfusionMatrix& cm) {
  std::int64_t trace = 0;
  for (std::size_t c = 0; c < cm.size(); ++c) trace += cm.at(c, c);
  return ratio(static_cast<double>(trace), static_cast<double>(cm.total()));
}

double weighted_f1(const ConfusionMatrix& cm) {
  double s = 0.0;
  for (const auto& m : prf_per_class(cm)) s += static_cast<double>(m.support) * m.f1;
  return ratio(s, static_cast<double>(cm.total()));
}

double macro_f1(const ConfusionMatrix& cm) {
  const auto per = prf_per_class(cm);
  double s = 0.0;
  for (const auto& m : per) s += m.f1;
  return per.empty() ? 0.0 : s / static_cast<double>(per.size());
}

double mae_ordinal(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                   const LabelSpace& labels) {
  if (!labels.is_ordinal()) throw UsageError("MAE needs an ordinal label space");
  check_lengths(y_true.size(), y_pred.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    s += std::abs(labels.rank(y_true[i]) - labels.rank(y_pred[i]));
  }
  return s / static_cast<double>(y_true.size());
}

double mae_ordinal(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                   const LabelSpace& labels) {
  if (!labels.is_ordinal()) throw UsageError("MAE needs an ordinal label space");
  check_lengths(y_true.size(), y_pred.size());
  std::vector<std::size_t> t;
  std::vector<std::size_t> p;
  for (const auto& l : y_true) t.push_back(labels.index_of(l));
  for (const auto& l : y_pred) p.push_back(labels.index_of(l));
  return mae_ordinal(std::span<const std::size_t>(t), std::span<const std::size_t>(p), labels);
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::kFeatureExtraction: return "feature_extraction";
    case Phase::kTraining: return "training";
    case Phase::kPrediction: return "prediction";
  }
  return "?";
}

double EvaluationReport::timing(Phase p) const {
  const auto it = timings.find(std::string(phase_name(p)));
  return it == timings.end() ? 0.0 : it->second;
}

EvaluationReport evaluate(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                          const LabelSpace& labels, std::string classifier) {
  EvaluationReport r;
  r.classifier = std::move(classifier);
  r.confusion = confusion(y_true, y_pred, labels);
  r.per_class = prf_per_class(r.confusion);
  r.accuracy = accuracy(r.confusion);
  r.weighted_f1 = weighted_f1(r.confusion);
  r.macro_f1 = macro_f1(r.confusion);
  if (labels.is_ordinal()) r.mae = mae_ordinal(y_true, y_pred, labels);
  return r;
}

std::string report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["classifier"] = r.classifier;
  j["accuracy"] = r.accuracy;
  j["weighted_f1"] = r.weighted_f1;
  j["macro_f1"] = r.macro_f1;
  j["mae"] = r.mae ? nlohmann::ordered_json(*r.mae) : nlohmann::ordered_json(nullptr);
  auto& per = j["per_class"] = nlohmann::ordered_json::object();
  for (const auto& m : r.per_class) {
    per[m.label] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                    {"support", m.support}};
  }
  auto& timing = j["timing"] = nlohmann::ordered_json::object();
  for (const auto& [phase, secs] : r.timings) timing[phase + "_seconds"] = secs;
  const auto& ls = r.confusion.label_space();
  auto& conf = j["confusion"];
  conf["labels"] = ls.labels();
  if (ls.is_ordinal()) conf["ranks"] = ls.ranks();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < r.confusion.size(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < r.confusion.size(); ++p) row.push_back(r.confusion.at(t, p));
    rows.push_back(std::move(row));
  }
  conf["counts"] = std::move(rows);
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json(std::string_view text) {
  EvaluationReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.classifier = j.at("classifier").get<std::string>();
    r.accuracy = j.at("accuracy").get<double>();
    r.weighted_f1 = j.at("weighted_f1").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    if (!j.at("mae").is_null()) r.mae = j.at("mae").get<double>();
    const auto& conf = j.at("confusion");
    auto labels = conf.at("labels").get<std::vector<std::string>>();
    LabelSpace ls = conf.contains("ranks")
                        ? LabelSpace(labels, conf.at("ranks").get<std::vector<int>>())
                        : LabelSpace(labels);
    r.confusion = ConfusionMatrix(ls);
    const auto& counts = conf.at("counts");
    for (std::size_t t = 0; t < ls.size(); ++t) {
      for (std::size_t p = 0; p < ls.size(); ++p) {
        r.confusion.add(t, p, counts.at(t).at(p).get<std::int64_t>());
      }
    }
    for (const auto& label : labels) {
      const auto& m = j.at("per_class").at(label);
      r.per_class.push_back(ClassMetrics{label, m.at("precision").get<double>(),
                                         m.at("recall").get<double>(), m.at("f1").get<double>(),
                                         m.at("support").get<std::int64_t>()});
    }
    for (const auto& [key, value] : j.at("timing").items()) {
      constexpr std::string_view kSuffix = "_seconds";
      std::string phase = key;
      if (phase.ends_with(kSuffix)) phase.resize(phase.size() - kSuffix.size());
      r.timings[phase] = value.get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

std::string report_to_kv(const EvaluationReport& r) {
  std::ostringstream out;
  out << "classifier=" << r.classifier << '\n';
  out << "accuracy=" << format_double(r.accuracy) << '\n';
  out << "weighted_f1=" << format_double(r.weighted_f1) << '\n';
  out << "macro_f1=" << format_double(r.macro_f1) << '\n';
  out << "mae=" << (r.mae ? format_double(*r.mae) : std::string("null")) << '\n';
  for (const auto& m : r.per_class) {
    const std::string p = "per_class." + m.label + ".";
    out << p << "precision=" << format_double(m.precision) << '\n';
    out << p << "recall=" << format_double(m.recall) << '\n';
    out << p << "f1=" << format_double(m.f1) << '\n';
    out << p << "support=" << m.support << '\n';
  }
  for (const auto& [phase, secs] : r.timings) {
    out << "timing." << phase << "_seconds=" << format_double(secs) << '\n';
  }
  return out.str();
}

}  // namespace stylo
