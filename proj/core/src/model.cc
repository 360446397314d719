#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "stylo/binary_io.h"
#include "stylo/classifiers.h"
#include "stylo/error.h"

namespace stylo {

void TrainingMatrix::validate() const {
  if (rows.size() != labels.size()) {
    throw DataError("training matrix has " + std::to_string(rows.size()) + " rows but " +
                    std::to_string(labels.size()) + " labels");
  }
  if (rows.empty()) throw DataError("training matrix is empty");
  const std::size_t d = rows.front().dimension();
  for (const auto& r : rows) {
    if (r.dimension() != d) throw DataError("training rows have differing dimensions");
  }
  for (auto l : labels) {
    if (l >= label_space.size()) throw DataError("label index out of range");
  }
}

std::size_t TrainingMatrix::classes_present() const {
  std::unordered_set<std::size_t> s(labels.begin(), labels.end());
  return s.size();
}

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kMajority: return "majority";
    case ModelKind::kKnn: return "knn";
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kLinSvm: return "linsvm";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kDTree: return "dtree";
    case ModelKind::kRForest: return "rforest";
    case ModelKind::kGBoost: return "gboost";
  }
  return "?";
}

std::string_view display_name(ModelKind k) {
  switch (k) {
    case ModelKind::kMajority: return "Majority";
    case ModelKind::kKnn: return "KNN";
    case ModelKind::kLogReg: return "LR";
    case ModelKind::kLinSvm: return "LSVM";
    case ModelKind::kMlp: return "MLP";
    case ModelKind::kDTree: return "DT";
    case ModelKind::kRForest: return "RF";
    case ModelKind::kGBoost: return "GB";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  for (auto k : kAllModelKinds) {
    if (kind_name(k) == name) return k;
  }
  throw UsageError("unknown classifier '" + std::string(name) + "'");
}

const std::vector<double>& Tree::leaf_scores(const SparseVector& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x.at(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left
                                                                                          : n.right);
  }
  return nodes[i].scores;
}

std::size_t Tree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return best;
}

LinearParams LinearParams::zeros(std::size_t n_classes, std::size_t dimension) {
  return LinearParams{n_classes, dimension, std::vector<double>(n_classes * dimension, 0.0),
                      std::vector<double>(n_classes, 0.0)};
}

double LinearParams::score(std::size_t c, const SparseVector& x) const {
  return x.dot(std::span<const double>(weights).subspan(c * dimension, dimension)) + bias[c];
}

MlpParams MlpParams::zeros(std::size_t dimension, std::size_t hidden, std::size_t n_classes) {
  MlpParams p;
  p.dimension = dimension;
  p.hidden = hidden;
  p.n_classes = n_classes;
  p.w1.assign(dimension * hidden, 0.0);
  p.b1.assign(hidden, 0.0);
  p.w2.assign(hidden * n_classes, 0.0);
  p.b2.assign(n_classes, 0.0);
  return p;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (auto& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (auto& v : p) v /= z;
  return p;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

namespace {

std::vector<double> mlp_logits(const MlpParams& p, const SparseVector& x) {
  std::vector<double> h(p.b1);
  for (const auto& e : x) {
    const double* row = &p.w1[static_cast<std::size_t>(e.index) * p.hidden];
    for (std::size_t j = 0; j < p.hidden; ++j) h[j] += e.value * row[j];
  }
  std::vector<double> out(p.b2);
  for (std::size_t j = 0; j < p.hidden; ++j) {
    const double a = h[j] > 0.0 ? h[j] : 0.0;
    if (a == 0.0) continue;
    const double* row = &p.w2[j * p.n_classes];
    for (std::size_t c = 0; c < p.n_classes; ++c) out[c] += a * row[c];
  }
  return out;
}

std::vector<double> knn_votes(const KnnParams& p, std::size_t n_classes, const SparseVector& x) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(p.rows.size());
  for (std::size_t i = 0; i < p.rows.size(); ++i) dist.emplace_back(squared_distance(x, p.rows[i]), i);
  const std::size_t k = std::min(p.k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<double> votes(n_classes, 0.0);
  for (std::size_t i = 0; i < k; ++i) votes[p.labels[dist[i].second]] += 1.0;
  return votes;
}

}  // namespace

Model::Model(ModelKind kind, LabelSpace labels, std::size_t dimension, ModelParams params)
    : kind_(kind), labels_(std::move(labels)), dimension_(dimension), params_(std::move(params)) {}

void Model::check_dimension(const SparseVector& x) const {
  if (x.dimension() != dimension_) {
    throw DataError("feature dimension mismatch: model expects " + std::to_string(dimension_) +
                    ", got " + std::to_string(x.dimension()));
  }
}

std::vector<double> Model::decision_scores(const SparseVector& x) const {
  check_dimension(x);
  const std::size_t k = labels_.size();
  return std::visit(
      [&](const auto& p) -> std::vector<double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, MajorityParams>) {
          std::vector<double> s(k, 0.0);
          s[p.label] = 1.0;
          return s;
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return knn_votes(p, k, x);
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          std::vector<double> s(k);
          for (std::size_t c = 0; c < k; ++c) s[c] = p.score(c, x);
          return s;
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          return mlp_logits(p, x);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return p.tree.leaf_scores(x);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          std::vector<double> votes(k, 0.0);
          for (const auto& t : p.trees) votes[argmax(t.leaf_scores(x))] += 1.0;
          return votes;
        } else {
          std::vector<double> f(p.initial);
          for (std::size_t s = 0; s < p.n_stages; ++s) {
            for (std::size_t c = 0; c < k; ++c) {
              f[c] += p.learning_rate * p.trees[s * k + c].leaf_scores(x)[0];
            }
          }
          return f;
        }
      },
      params_);
}

std::size_t Model::predict_index(const SparseVector& x) const {
  return argmax(decision_scores(x));
}

std::vector<std::size_t> Model::predict_indices(std::span<const SparseVector> rows) const {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict_index(r));
  return out;
}

std::vector<std::string> Model::predict(std::span<const SparseVector> rows) const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(labels_.label(predict_index(r)));
  return out;
}

bool Model::has_probabilities() const noexcept {
  return kind_ == ModelKind::kLogReg || kind_ == ModelKind::kMlp || kind_ == ModelKind::kGBoost;
}

std::vector<double> Model::predict_proba(const SparseVector& x) const {
  if (!has_probabilities()) {
    throw UsageError(std::string(kind_name(kind_)) + " does not provide probabilities");
  }
  return softmax(decision_scores(x));
}

// --- persistence ------------------------------------------------------------

namespace {

constexpr std::string_view kModelMagic = "STYLOMDL";
constexpr char kModelVersion = '1';

void write_sparse(BinaryWriter& w, const SparseVector& v) {
  w.u64(v.nnz());
  for (const auto& e : v) {
    w.u32(e.index);
    w.f64(e.value);
  }
}

SparseVector read_sparse(BinaryReader& r, std::size_t dim) {
  const auto nnz = r.u64();
  if (nnz > dim) r.corrupt("sparse row");
  std::vector<SparseEntry> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const auto idx = r.u32();
    entries.push_back({idx, r.f64()});
  }
  return SparseVector(dim, std::move(entries));
}

void write_tree(BinaryWriter& w, const Tree& t) {
  w.u64(t.nodes.size());
  for (const auto& n : t.nodes) {
    w.u32(static_cast<std::uint32_t>(n.feature));
    w.f64(n.threshold);
    w.u32(static_cast<std::uint32_t>(n.left));
    w.u32(static_cast<std::uint32_t>(n.right));
    w.f64s(n.scores);
  }
}

Tree read_tree(BinaryReader& r, std::size_t dim) {
  Tree t;
  const auto n = r.u64();
  if (n == 0 || n > (std::uint64_t{1} << 31)) r.corrupt("tree size");
  t.nodes.resize(static_cast<std::size_t>(n));
  for (auto& node : t.nodes) {
    node.feature = static_cast<std::int32_t>(r.u32());
    node.threshold = r.f64();
    node.left = static_cast<std::int32_t>(r.u32());
    node.right = static_cast<std::int32_t>(r.u32());
    node.scores = r.f64s(1u << 20);
    if (!node.is_leaf()) {
      if (static_cast<std::size_t>(node.feature) >= dim || node.left <= 0 || node.right <= 0 ||
          static_cast<std::uint64_t>(node.left) >= n || static_cast<std::uint64_t>(node.right) >= n) {
        r.corrupt("tree node");
      }
    }
  }
  return t;
}

std::vector<double> read_exact(BinaryReader& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.f64();
  return v;
}

}  // namespace

void Model::write(std::ostream& out) const {
  BinaryWriter w(out);
  w.bytes(kModelMagic);
  w.u8(static_cast<std::uint8_t>(kModelVersion));
  w.u8(static_cast<std::uint8_t>(kind_));
  w.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& l : labels_.labels()) w.str(l);
  w.u8(labels_.is_ordinal() ? 1 : 0);
  if (labels_.is_ordinal()) {
    for (int r : labels_.ranks()) w.i64(r);
  }
  w.u64(dimension_);
  w.f64(training_seconds_);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, MajorityParams>) {
          w.u64(p.label);
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          w.u64(p.k);
          w.u64(p.rows.size());
          for (const auto& row : p.rows) write_sparse(w, row);
          for (auto l : p.labels) w.u64(l);
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          w.u64(p.n_classes);
          w.u64(p.dimension);
          for (double x : p.weights) w.f64(x);
          for (double x : p.bias) w.f64(x);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          w.u64(p.hidden);
          for (double x : p.w1) w.f64(x);
          for (double x : p.b1) w.f64(x);
          for (double x : p.w2) w.f64(x);
          for (double x : p.b2) w.f64(x);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          write_tree(w, p.tree);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          w.u64(p.trees.size());
          for (const auto& t : p.trees) write_tree(w, t);
        } else {
          w.f64(p.learning_rate);
          w.u64(p.n_stages);
          for (double x : p.initial) w.f64(x);
          for (const auto& t : p.trees) write_tree(w, t);
          w.f64s(p.stage_loss);
        }
      },
      params_);
}

Model Model::read(std::istream& in) {
  std::string magic(kModelMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (static_cast<std::size_t>(in.gcount()) != magic.size() || magic != kModelMagic) {
    throw DataError("not a model file");
  }
  BinaryReader r(in, "model file");
  const char version = static_cast<char>(r.u8());
  if (version != kModelVersion) {
    throw DataError(std::string("unsupported model version '") + version + "' (supported: 1)");
  }
  const auto kind_byte = r.u8();
  if (kind_byte > static_cast<std::uint8_t>(ModelKind::kGBoost)) r.corrupt("model kind");
  const auto kind = static_cast<ModelKind>(kind_byte);
  const auto n_labels = r.u32();
  if (n_labels < 2 || n_labels > 100000) r.corrupt("label count");
  std::vector<std::string> labels;
  for (std::uint32_t i = 0; i < n_labels; ++i) labels.push_back(r.str());
  LabelSpace space;
  if (r.u8() != 0) {
    std::vector<int> ranks;
    for (std::uint32_t i = 0; i < n_labels; ++i) ranks.push_back(static_cast<int>(r.i64()));
    space = LabelSpace(std::move(labels), std::move(ranks));
  } else {
    space = LabelSpace(std::move(labels));
  }
  const auto dim = static_cast<std::size_t>(r.u64());
  const double seconds = r.f64();
  const std::size_t k = space.size();

  ModelParams params;
  switch (kind) {
    case ModelKind::kMajority: {
      MajorityParams p;
      p.label = static_cast<std::size_t>(r.u64());
      if (p.label >= k) r.corrupt("majority label");
      params = p;
      break;
    }
    case ModelKind::kKnn: {
      KnnParams p;
      p.k = static_cast<std::size_t>(r.u64());
      const auto n = r.u64();
      if (n > (std::uint64_t{1} << 32)) r.corrupt("row count");
      for (std::uint64_t i = 0; i < n; ++i) p.rows.push_back(read_sparse(r, dim));
      for (std::uint64_t i = 0; i < n; ++i) {
        p.labels.push_back(static_cast<std::size_t>(r.u64()));
        if (p.labels.back() >= k) r.corrupt("knn label");
      }
      params = std::move(p);
      break;
    }
    case ModelKind::kLogReg:
    case ModelKind::kLinSvm: {
      LinearParams p;
      p.n_classes = static_cast<std::size_t>(r.u64());
      p.dimension = static_cast<std::size_t>(r.u64());
      if (p.n_classes != k || p.dimension != dim) r.corrupt("linear shape");
      p.weights = read_exact(r, k * dim);
      p.bias = read_exact(r, k);
      params = std::move(p);
      break;
    }
    case ModelKind::kMlp: {
      const auto hidden = static_cast<std::size_t>(r.u64());
      if (hidden == 0 || hidden > (1u << 20)) r.corrupt("hidden size");
      MlpParams p;
      p.dimension = dim;
      p.hidden = hidden;
      p.n_classes = k;
      p.w1 = read_exact(r, dim * hidden);
      p.b1 = read_exact(r, hidden);
      p.w2 = read_exact(r, hidden * k);
      p.b2 = read_exact(r, k);
      params = std::move(p);
      break;
    }
    case ModelKind::kDTree:
      params = TreeParams{read_tree(r, dim)};
      break;
    case ModelKind::kRForest: {
      ForestParams p;
      const auto n = r.u64();
      if (n == 0 || n > (1u << 20)) r.corrupt("tree count");
      for (std::uint64_t i = 0; i < n; ++i) p.trees.push_back(read_tree(r, dim));
      params = std::move(p);
      break;
    }
    case ModelKind::kGBoost: {
      BoostParams p;
      p.learning_rate = r.f64();
      p.n_stages = static_cast<std::size_t>(r.u64());
      if (p.n_stages == 0 || p.n_stages > (1u << 20)) r.corrupt("stage count");
      p.initial = read_exact(r, k);
      for (std::size_t i = 0; i < p.n_stages * k; ++i) p.trees.push_back(read_tree(r, dim));
      p.stage_loss = r.f64s(p.n_stages + 1);
      params = std::move(p);
      break;
    }
  }
  Model m(kind, std::move(space), dim, std::move(params));
  m.set_training_seconds(seconds);
  return m;
}

void persist_model(const Model& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model " + path.string());
  m.write(out);
  if (!out) throw DataError("write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  return Model::read(in);
}

}  // namespace stylo
