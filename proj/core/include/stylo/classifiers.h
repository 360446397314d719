#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stylo/corpus.h"
#include "stylo/sparse.h"

namespace stylo {

struct TrainingMatrix {
  std::vector<SparseVector> rows;
  std::vector<std::size_t> labels;
  LabelSpace label_space;

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t dimension() const noexcept { return rows.empty() ? 0 : rows.front().dimension(); }
  // Throws DataError on ragged dimensions, length mismatch or bad labels.
  void validate() const;
  // Number of distinct labels that actually occur.
  std::size_t classes_present() const;
};

enum class ModelKind : std::uint8_t {
  kMajority = 0,
  kKnn = 1,
  kLogReg = 2,
  kLinSvm = 3,
  kMlp = 4,
  kDTree = 5,
  kRForest = 6,
  kGBoost = 7,
};

inline constexpr ModelKind kAllModelKinds[] = {
    ModelKind::kMajority, ModelKind::kKnn,   ModelKind::kLogReg,  ModelKind::kLinSvm,
    ModelKind::kMlp,      ModelKind::kDTree, ModelKind::kRForest, ModelKind::kGBoost};

// Config/CLI identifier: majority, knn, logreg, linsvm, mlp, dtree, rforest, gboost.
std::string_view kind_name(ModelKind k);
// Results-table column header: Majority, KNN, LR, LSVM, MLP, DT, RF, GB.
std::string_view display_name(ModelKind k);
ModelKind parse_kind(std::string_view name);

// Binary tree node; a leaf has feature == -1. Rows with x[feature] <=
// threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> scores;  // leaf payload

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at 0

  const std::vector<double>& leaf_scores(const SparseVector& x) const;
  std::size_t depth() const;
  bool operator==(const Tree&) const = default;
};

struct MajorityParams {
  std::size_t label = 0;
  bool operator==(const MajorityParams&) const = default;
};

struct KnnParams {
  std::size_t k = 5;
  std::vector<SparseVector> rows;
  std::vector<std::size_t> labels;
  bool operator==(const KnnParams&) const = default;
};

// Per-class weight rows (row-major, n_classes x dimension) and biases.
struct LinearParams {
  std::size_t n_classes = 0;
  std::size_t dimension = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  static LinearParams zeros(std::size_t n_classes, std::size_t dimension);
  double score(std::size_t c, const SparseVector& x) const;
  bool operator==(const LinearParams&) const = default;
};

// One ReLU hidden layer. w1 is dimension x hidden (row per input feature),
// w2 is hidden x n_classes.
struct MlpParams {
  std::size_t dimension = 0;
  std::size_t hidden = 0;
  std::size_t n_classes = 0;
  std::vector<double> w1, b1, w2, b2;

  static MlpParams zeros(std::size_t dimension, std::size_t hidden, std::size_t n_classes);
  bool operator==(const MlpParams&) const = default;
};

struct TreeParams {
  Tree tree;
  bool operator==(const TreeParams&) const = default;
};

struct ForestParams {
  std::vector<Tree> trees;
  bool operator==(const ForestParams&) const = default;
};

struct BoostParams {
  double learning_rate = 0.1;
  std::size_t n_stages = 0;
  std::vector<double> initial;       // log class priors
  std::vector<Tree> trees;           // stage-major, n_stages * n_classes
  std::vector<double> stage_loss;    // training log-loss: initial, then after each stage
  bool operator==(const BoostParams&) const = default;
};

using ModelParams = std::variant<MajorityParams, KnnParams, LinearParams, MlpParams, TreeParams,
                                 ForestParams, BoostParams>;

class Model {
 public:
  Model(ModelKind kind, LabelSpace labels, std::size_t dimension, ModelParams params);

  ModelKind kind() const noexcept { return kind_; }
  const LabelSpace& label_space() const noexcept { return labels_; }
  std::size_t feature_dimension() const noexcept { return dimension_; }
  const ModelParams& params() const noexcept { return params_; }
  double training_seconds() const noexcept { return training_seconds_; }
  void set_training_seconds(double s) noexcept { training_seconds_ = s; }

  // Throws DataError when a row's dimension differs from feature_dimension().
  std::size_t predict_index(const SparseVector& x) const;
  std::vector<std::size_t> predict_indices(std::span<const SparseVector> rows) const;
  std::vector<std::string> predict(std::span<const SparseVector> rows) const;

  // logreg, mlp and gboost only.
  bool has_probabilities() const noexcept;
  std::vector<double> predict_proba(const SparseVector& x) const;

  // Per-class scores whose argmax (lowest index on ties) is the prediction.
  std::vector<double> decision_scores(const SparseVector& x) const;

  // STYLOMDL1 format; see docs/formats.md.
  void write(std::ostream& out) const;
  static Model read(std::istream& in);

  bool operator==(const Model&) const = default;

 private:
  void check_dimension(const SparseVector& x) const;

  ModelKind kind_;
  LabelSpace labels_;
  std::size_t dimension_;
  ModelParams params_;
  double training_seconds_ = 0.0;
};

void persist_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

// --- trainers -------------------------------------------------------------
// Every trainer is deterministic in (matrix, config) and records its own
// wall-clock training time on the returned model.

// Most frequent training label; ties go to the lexicographically smallest
// label string.
Model train_majority(const TrainingMatrix& m);

// Euclidean k-NN. Distance ties: lower row index first. Vote ties: smallest
// label index.
Model train_knn(const TrainingMatrix& m, std::size_t k = 5);

struct LogRegConfig {
  double l2 = 1e-4;
  int epochs = 200;
  double learning_rate = 0.5;
};
// Multinomial logistic regression, zero-initialised, full-batch gradient
// descent on mean cross-entropy + (l2/2)||W||^2 (bias unregularised).
Model train_logreg(const TrainingMatrix& m, const LogRegConfig& cfg = {});

struct LinSvmConfig {
  double c = 1.0;
  int epochs = 200;
};
// One-vs-rest linear SVM. Weights follow the full-batch Pegasos subgradient
// step 1/(lambda t), lambda = 1/(C n). The bias is unregularised and moves by
// 1/sqrt(t) times the mean violator sign, which keeps the solution path
// invariant under x -> a*x, C -> C/a^2.
Model train_linsvm(const TrainingMatrix& m, const LinSvmConfig& cfg = {});

struct MlpConfig {
  std::size_t hidden = 100;
  int epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};
// Weights drawn from uniform(-s, s), s = sqrt(6 / (fan_in + fan_out)), in
// the order w1 then w2 (row-major) from SplitMix64(seed); biases start at 0.
Model train_mlp(const TrainingMatrix& m, const MlpConfig& cfg = {});

struct TreeConfig {
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
};
// CART with Gini impurity. Candidate thresholds are midpoints between
// consecutive distinct values (implicit zeros included). Ties go to the lower
// feature index, then the lower threshold.
Model train_dtree(const TrainingMatrix& m, const TreeConfig& cfg = {});

struct ForestConfig {
  std::size_t n_trees = 100;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  // Candidate features per node; default ceil(sqrt(d)). Only features that
  // are non-constant within the node are eligible.
  std::optional<std::size_t> max_features;
  TreeConfig tree;
};
// Tree t uses SplitMix64(seed + t) for its bootstrap draw and its per-node
// feature sampling. Prediction is a plurality vote of per-tree argmaxes.
Model train_rforest(const TrainingMatrix& m, const ForestConfig& cfg = {});

struct GBoostConfig {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 1;
};
// Multinomial-deviance gradient boosting with one regression tree per class
// per stage. Leaf value: sum(r) / max(sum(|r|(1-|r|)), 1e-8).
Model train_gboost(const TrainingMatrix& m, const GBoostConfig& cfg = {});

// --- objectives (exposed for gradient checking) ---------------------------

// Mean cross-entropy + (l2/2)||W||^2. Fills `grad` when non-null.
double logreg_objective(const LinearParams& p, const TrainingMatrix& m, double l2,
                        LinearParams* grad);
// Mean cross-entropy of the MLP. Fills `grad` when non-null.
double mlp_objective(const MlpParams& p, const TrainingMatrix& m, MlpParams* grad);
MlpParams mlp_initial_params(std::size_t dimension, std::size_t hidden, std::size_t n_classes,
                             std::uint64_t seed);

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);
// Index of the maximum; lowest index wins ties.
std::size_t argmax(std::span<const double> v);

}  // namespace stylo
