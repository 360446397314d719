#include <gtest/gtest.h>

#include <sstream>

#include "matrix_support.h"
#include "stylo/classifiers.h"
#include "stylo/error.h"
#include "test_support.h"

namespace stylo {
namespace {

std::vector<Model> one_of_each(const TrainingMatrix& m) {
  return {train_majority(m),
          train_knn(m, 5),
          train_logreg(m),
          train_linsvm(m),
          train_mlp(m, {12, 30, 0.1, 4}),
          train_dtree(m, {4, 2}),
          train_rforest(m, {7, 3}),
          train_gboost(m, {6, 0.2, 2, 1})};
}

std::string bytes_of(const Model& m) {
  std::ostringstream out;
  m.write(out);
  return out.str();
}

std::string error_of(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    Model::read(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "no error";
}

TEST(Persistence, AllKindsRoundTripWithIdenticalPredictions) {
  SplitMix64 rng(31);
  auto m = testing::random_matrix(rng, 60, 9, 3, 0.5);
  m.label_space = LabelSpace({"left", "center", "right"}, {0, 1, 2});
  testing::TempDir tmp;
  const auto models = one_of_each(m);
  ASSERT_EQ(models.size(), 8u);
  for (const auto& model : models) {
    const auto path = tmp / (std::string(kind_name(model.kind())) + ".bin");
    persist_model(model, path);
    const auto back = load_model(path);
    EXPECT_EQ(back, model) << kind_name(model.kind());
    EXPECT_EQ(bytes_of(back), bytes_of(model));
    for (int q = 0; q < 50; ++q) {
      const auto x = testing::random_row(rng, 9);
      EXPECT_EQ(back.predict_index(x), model.predict_index(x));
      EXPECT_EQ(back.decision_scores(x), model.decision_scores(x));
    }
  }
}

TEST(Persistence, HeaderLayout) {
  const auto m = testing::dense_matrix({{0}, {1}, {1}}, {0, 1, 1});
  const auto bytes = bytes_of(train_majority(m));
  EXPECT_EQ(bytes.substr(0, 9), "STYLOMDL1");
  EXPECT_EQ(static_cast<int>(bytes[9]), static_cast<int>(ModelKind::kMajority));
}

TEST(Persistence, CorruptMagicVersionAndTruncation) {
  SplitMix64 rng(32);
  const auto m = testing::random_matrix(rng, 20, 4, 2);
  const auto bytes = bytes_of(train_gboost(m, {3, 0.1, 2, 1}));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(error_of(bad_magic), "not a model file");
  EXPECT_EQ(error_of("hello"), "not a model file");

  auto bumped = bytes;
  bumped[8] = '2';
  const auto msg = error_of(bumped);
  EXPECT_NE(msg.find("unsupported model version '2'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("supported: 1"), std::string::npos) << msg;

  for (std::size_t cut : {std::size_t{10}, bytes.size() / 3, bytes.size() - 1}) {
    EXPECT_EQ(error_of(bytes.substr(0, cut)), "truncated model file") << cut;
  }
  EXPECT_THROW(load_model("/nonexistent/model.bin"), DataError);
}

}  // namespace
}  // namespace stylo
