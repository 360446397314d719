#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylo/annotate.h"
#include "stylo/corpus.h"
#include "stylo/sparse.h"

namespace stylo {

// Symbol -> dense index map fitted on training documents. Indices follow
// lexicographic (byte-wise) symbol order.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Rebuilds a frozen vocabulary from persisted parts; validates invariants.
  static Vocabulary from_parts(std::vector<std::string> symbols,
                               std::vector<std::int64_t> document_frequency,
                               std::int64_t n_documents);

  std::size_t size() const noexcept { return symbols_.size(); }
  bool frozen() const noexcept { return frozen_; }
  std::int64_t n_documents() const noexcept { return n_documents_; }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  const std::string& symbol(std::size_t i) const { return symbols_.at(i); }
  std::int64_t document_frequency(std::size_t i) const { return df_.at(i); }
  const std::vector<std::int64_t>& document_frequencies() const noexcept { return df_; }
  std::optional<std::uint32_t> find(std::string_view symbol) const;

  bool operator==(const Vocabulary& o) const {
    return symbols_ == o.symbols_ && df_ == o.df_ && n_documents_ == o.n_documents_ &&
           frozen_ == o.frozen_;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::int64_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::int64_t n_documents_ = 0;
  bool frozen_ = false;
};

// Keeps symbols with document frequency >= min_df; with max_features, keeps
// the most frequent by total count (ties: lexicographically smaller first).
Vocabulary fit_vocabulary(std::span<const NgramMultiset> corpus, std::int64_t min_df = 1,
                          std::optional<std::size_t> max_features = std::nullopt);

// Out-of-vocabulary symbols are dropped.
SparseVector vectorize_counts(const NgramMultiset& m, const Vocabulary& v);

struct IdfWeights {
  std::vector<double> idf;
  std::size_t dimension() const noexcept { return idf.size(); }
};

// idf_i = ln((1 + N) / (1 + df_i)) + 1.
IdfWeights fit_idf(const Vocabulary& v);

// count_i * idf_i, then L2-normalised; a zero vector stays zero.
SparseVector transform_tfidf(const SparseVector& counts, const IdfWeights& w);

// Dense per-instance vectors read from the embedding interchange format:
//   dim=<D>
//   <instance_id>\t<v1> <v2> ... <vD>
struct Embeddings {
  std::size_t dimension = 0;
  std::map<std::string, std::vector<double>, std::less<>> vectors;
};

Embeddings load_embeddings(const std::filesystem::path& path, std::size_t expected_dim);
Embeddings parse_embeddings(std::istream& in, std::size_t expected_dim);
void write_embeddings(const Embeddings& e, std::ostream& out);

enum class FeatureBlock : std::uint8_t {
  kWordBow = 0,
  kWordTfidf = 1,
  kCharBow = 2,
  kPosBow = 3,
  kMorph = 4,
  kEmbedding = 5,
};

inline constexpr std::array<FeatureBlock, 6> kFeatureBlockOrder = {
    FeatureBlock::kWordBow, FeatureBlock::kWordTfidf, FeatureBlock::kCharBow,
    FeatureBlock::kPosBow,  FeatureBlock::kMorph,     FeatureBlock::kEmbedding};

std::string_view block_name(FeatureBlock b);
FeatureBlock parse_block(std::string_view name);

struct BlockOptions {
  bool enabled = false;
  std::int64_t min_df = 1;
  std::optional<std::size_t> max_features;
  int ngram_min = 1;  // char_bow / pos_bow only
  int ngram_max = 4;
  // Scale the block's sub-vector to unit L2 norm after weighting.
  bool l2_normalize = false;
  // word_tfidf only: tf -> 1 + ln(tf).
  bool sublinear_tf = false;

  bool operator==(const BlockOptions&) const = default;
};

struct PipelineConfig {
  std::array<BlockOptions, 6> blocks{};
  std::size_t embedding_dim = 0;

  BlockOptions& operator[](FeatureBlock b) { return blocks[static_cast<std::size_t>(b)]; }
  const BlockOptions& operator[](FeatureBlock b) const {
    return blocks[static_cast<std::size_t>(b)];
  }
  // Throws UsageError when no block is enabled or an n-gram range leaves 1..4.
  void validate() const;
};

// External per-instance resources. Without annotations the POS block falls
// back to the built-in tagger; the morph block then cannot be used.
struct FeatureInputs {
  const AnnotationIndex* annotations = nullptr;
  const Embeddings* embeddings = nullptr;
};

struct FittedBlock {
  FeatureBlock kind{};
  BlockOptions options;
  Vocabulary vocabulary;        // BoW-style blocks
  IdfWeights idf;               // word_tfidf only
  std::vector<double> mean;     // embedding only
  std::vector<double> stddev;   // embedding only, floored at 1e-8
  std::size_t offset = 0;
  std::size_t dimension = 0;
};

class FittedPipeline {
 public:
  FittedPipeline() = default;
  explicit FittedPipeline(std::vector<FittedBlock> blocks);

  const std::vector<FittedBlock>& blocks() const noexcept { return blocks_; }
  std::size_t dimension() const noexcept { return dimension_; }
  const FittedBlock* find(FeatureBlock b) const;

  // Concatenation of every block's sub-vector at its recorded offset.
  SparseVector transform(const Instance& inst, const FeatureInputs& inputs) const;
  // One block on its own (dimension = block dimension, indices from 0).
  SparseVector transform_block(std::size_t block_index, const Instance& inst,
                               const FeatureInputs& inputs) const;
  std::vector<SparseVector> transform_all(const Dataset& d, const FeatureInputs& inputs) const;

  // STYLOPIPE1 format; see docs/formats.md.
  void write(std::ostream& out) const;
  static FittedPipeline read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static FittedPipeline load(const std::filesystem::path& path);

 private:
  std::vector<FittedBlock> blocks_;
  std::size_t dimension_ = 0;
};

// Fits every enabled block on `train` only, in the fixed block order. Throws
// DataError listing instance ids that lack a required annotation/embedding.
FittedPipeline fit_pipeline(const Dataset& train, const FeatureInputs& inputs,
                            const PipelineConfig& cfg);

// Symbol multiset an instance contributes to a BoW-style block.
NgramMultiset block_symbols(FeatureBlock kind, const BlockOptions& opts, const Instance& inst,
                            const FeatureInputs& inputs);

}  // namespace stylo
