#include "stylo/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stylo/binary_io.h"
#include "stylo/error.h"
#include "stylo/text_util.h"

namespace stylo {

Vocabulary Vocabulary::from_parts(std::vector<std::string> symbols,
                                  std::vector<std::int64_t> document_frequency,
                                  std::int64_t n_documents) {
  if (symbols.size() != document_frequency.size()) {
    throw DataError("vocabulary: symbol and df arrays differ in length");
  }
  Vocabulary v;
  v.n_documents_ = n_documents;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i > 0 && !(symbols[i - 1] < symbols[i])) {
      throw DataError("vocabulary symbols must be strictly increasing");
    }
    if (document_frequency[i] < 1 || document_frequency[i] > n_documents) {
      throw DataError("vocabulary df out of range for '" + symbols[i] + "'");
    }
    v.index_.emplace(symbols[i], static_cast<std::uint32_t>(i));
  }
  v.symbols_ = std::move(symbols);
  v.df_ = std::move(document_frequency);
  v.frozen_ = true;
  return v;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view symbol) const {
  const auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary fit_vocabulary(std::span<const NgramMultiset> corpus, std::int64_t min_df,
                          std::optional<std::size_t> max_features) {
  if (corpus.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
  struct Stat {
    std::int64_t df = 0;
    std::int64_t total = 0;
  };
  std::unordered_map<std::string, Stat> stats;
  for (const auto& doc : corpus) {
    for (const auto& [sym, c] : doc.entries()) {
      auto& s = stats[sym];
      ++s.df;
      s.total += c;
    }
  }
  std::vector<std::pair<const std::string*, Stat>> kept;
  for (const auto& [sym, s] : stats) {
    if (s.df >= min_df) kept.emplace_back(&sym, s);
  }
  if (max_features && kept.size() > *max_features) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second.total != b.second.total) return a.second.total > b.second.total;
      return *a.first < *b.first;
    });
    kept.resize(*max_features);
  }
  if (kept.empty()) throw DataError("vocabulary is empty after min_df/max_features filtering");
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return *a.first < *b.first; });
  std::vector<std::string> symbols;
  std::vector<std::int64_t> df;
  symbols.reserve(kept.size());
  df.reserve(kept.size());
  for (const auto& [sym, s] : kept) {
    symbols.push_back(*sym);
    df.push_back(s.df);
  }
  return Vocabulary::from_parts(std::move(symbols), std::move(df),
                                static_cast<std::int64_t>(corpus.size()));
}

SparseVector vectorize_counts(const NgramMultiset& m, const Vocabulary& v) {
  if (!v.frozen()) throw UsageError("vectorize_counts needs a fitted vocabulary");
  std::vector<SparseEntry> entries;
  entries.reserve(m.size());
  for (const auto& [sym, c] : m.entries()) {
    if (auto idx = v.find(sym)) entries.push_back({*idx, static_cast<double>(c)});
  }
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  return SparseVector(v.size(), std::move(entries));
}

IdfWeights fit_idf(const Vocabulary& v) {
  if (!v.frozen()) throw UsageError("fit_idf needs a fitted vocabulary");
  IdfWeights w;
  w.idf.reserve(v.size());
  const double n = static_cast<double>(v.n_documents());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double df = static_cast<double>(v.document_frequency(i));
    w.idf.push_back(std::log((1.0 + n) / (1.0 + df)) + 1.0);
  }
  return w;
}

SparseVector transform_tfidf(const SparseVector& counts, const IdfWeights& w) {
  if (counts.dimension() != w.dimension()) {
    throw DataError("tf-idf dimension mismatch: vector " + std::to_string(counts.dimension()) +
                    " vs idf " + std::to_string(w.dimension()));
  }
  std::vector<SparseEntry> entries;
  entries.reserve(counts.nnz());
  double sq = 0.0;
  for (const auto& e : counts) {
    const double v = e.value * w.idf[e.index];
    entries.push_back({e.index, v});
    sq += v * v;
  }
  if (sq > 0.0) {
    const double norm = std::sqrt(sq);
    for (auto& e : entries) e.value /= norm;
  }
  std::erase_if(entries, [](const SparseEntry& e) { return e.value == 0.0; });
  return SparseVector(counts.dimension(), std::move(entries));
}

Embeddings parse_embeddings(std::istream& in, std::size_t expected_dim) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("embedding file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::uint64_t dim = 0;
  if (!line.starts_with("dim=") || !parse_u64(std::string_view(line).substr(4), dim) || dim == 0) {
    throw DataError("embedding file must start with 'dim=<D>'");
  }
  if (dim != expected_dim) {
    throw DataError("embedding dimension mismatch: file declares dim=" + std::to_string(dim) +
                    ", expected " + std::to_string(expected_dim));
  }
  Embeddings e;
  e.dimension = expected_dim;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto where = " at row " + std::to_string(row);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw DataError("missing instance id" + where);
    std::string id = line.substr(0, tab);
    std::vector<double> values;
    values.reserve(expected_dim);
    for (auto tok : split(std::string_view(line).substr(tab + 1), ' ')) {
      if (tok.empty()) continue;
      double v = 0.0;
      if (!parse_double(tok, v)) {
        throw DataError("invalid number '" + std::string(tok) + "'" + where);
      }
      if (!std::isfinite(v)) throw DataError("non-finite value" + where);
      values.push_back(v);
    }
    if (values.size() != expected_dim) throw DataError("dimension mismatch" + where);
    if (!e.vectors.emplace(std::move(id), std::move(values)).second) {
      throw DataError("duplicate id" + where);
    }
  }
  return e;
}

Embeddings load_embeddings(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  return parse_embeddings(in, expected_dim);
}

void write_embeddings(const Embeddings& e, std::ostream& out) {
  out << "dim=" << e.dimension << '\n';
  for (const auto& [id, vec] : e.vectors) {
    out << id << '\t';
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(vec[i]);
    }
    out << '\n';
  }
}

std::string_view block_name(FeatureBlock b) {
  switch (b) {
    case FeatureBlock::kWordBow: return "word_bow";
    case FeatureBlock::kWordTfidf: return "word_tfidf";
    case FeatureBlock::kCharBow: return "char_bow";
    case FeatureBlock::kPosBow: return "pos_bow";
    case FeatureBlock::kMorph: return "morph";
    case FeatureBlock::kEmbedding: return "embedding";
  }
  return "?";
}

FeatureBlock parse_block(std::string_view name) {
  for (auto b : kFeatureBlockOrder) {
    if (block_name(b) == name) return b;
  }
  throw UsageError("unknown feature block '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  bool any = false;
  for (auto b : kFeatureBlockOrder) {
    const auto& o = (*this)[b];
    if (!o.enabled) continue;
    any = true;
    if (o.ngram_min < 1 || o.ngram_max > 4 || o.ngram_min > o.ngram_max) {
      throw UsageError(std::string(block_name(b)) + ": n-gram range must lie within 1..4");
    }
    if (o.min_df < 1) throw UsageError(std::string(block_name(b)) + ": min_df must be >= 1");
    if (o.max_features && *o.max_features == 0) {
      throw UsageError(std::string(block_name(b)) + ": max_features must be positive");
    }
  }
  if (!any) throw UsageError("pipeline config enables no feature block");
  if ((*this)[FeatureBlock::kEmbedding].enabled && embedding_dim == 0) {
    throw UsageError("embedding block needs a positive embedding dimension");
  }
}

namespace {

const std::vector<AnnotatedSentence>* annotation_for(const FeatureInputs& inputs,
                                                     const std::string& id) {
  if (!inputs.annotations) return nullptr;
  const auto it = inputs.annotations->find(id);
  return it == inputs.annotations->end() ? nullptr : &it->second;
}

const std::vector<double>& embedding_for(const FeatureInputs& inputs, const std::string& id) {
  if (!inputs.embeddings) throw DataError("embedding block enabled but no embeddings supplied");
  const auto it = inputs.embeddings->vectors.find(id);
  if (it == inputs.embeddings->vectors.end()) {
    throw DataError("missing embedding for instance ids: " + id);
  }
  return it->second;
}

void check_coverage(const Dataset& d, const FeatureInputs& inputs, const PipelineConfig& cfg) {
  const bool need_ann = cfg[FeatureBlock::kMorph].enabled ||
                        (cfg[FeatureBlock::kPosBow].enabled && inputs.annotations);
  if (cfg[FeatureBlock::kMorph].enabled && !inputs.annotations) {
    throw UsageError("morph block requires an annotation (CoNLL-U) file");
  }
  const bool need_emb = cfg[FeatureBlock::kEmbedding].enabled;
  if (need_emb && !inputs.embeddings) {
    throw UsageError("embedding block requires an embedding file");
  }
  if (need_emb && inputs.embeddings->dimension != cfg.embedding_dim) {
    throw DataError("embedding dimension " + std::to_string(inputs.embeddings->dimension) +
                    " does not match configured " + std::to_string(cfg.embedding_dim));
  }
  const auto report = [](const char* what, const std::vector<std::string>& missing) {
    std::string msg = std::string("missing ") + what + " for " + std::to_string(missing.size()) +
                      " instance ids: ";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
      if (i > 0) msg += ", ";
      msg += missing[i];
    }
    if (missing.size() > 20) msg += ", ...";
    throw DataError(msg);
  };
  std::vector<std::string> missing_ann;
  std::vector<std::string> missing_emb;
  for (const auto& inst : d.instances) {
    if (need_ann && !annotation_for(inputs, inst.id)) missing_ann.push_back(inst.id);
    if (need_emb && !inputs.embeddings->vectors.contains(inst.id)) missing_emb.push_back(inst.id);
  }
  if (!missing_ann.empty()) report("annotations", missing_ann);
  if (!missing_emb.empty()) report("embeddings", missing_emb);
}

void l2_normalize(std::vector<SparseEntry>& entries) {
  double sq = 0.0;
  for (const auto& e : entries) sq += e.value * e.value;
  if (sq <= 0.0) return;
  const double norm = std::sqrt(sq);
  for (auto& e : entries) e.value /= norm;
  std::erase_if(entries, [](const SparseEntry& e) { return e.value == 0.0; });
}

}  // namespace

NgramMultiset block_symbols(FeatureBlock kind, const BlockOptions& opts, const Instance& inst,
                            const FeatureInputs& inputs) {
  switch (kind) {
    case FeatureBlock::kWordBow:
    case FeatureBlock::kWordTfidf:
      return word_unigrams(inst.text);
    case FeatureBlock::kCharBow:
      return char_ngrams(inst.text, opts.ngram_min, opts.ngram_max);
    case FeatureBlock::kPosBow: {
      if (!inputs.annotations) {
        const auto s = builtin_annotate(inst.id, inst.text);
        return pos_ngrams(s, opts.ngram_min, opts.ngram_max);
      }
      const auto* ann = annotation_for(inputs, inst.id);
      if (!ann) throw DataError("missing annotations for instance ids: " + inst.id);
      return pos_ngrams(std::span<const AnnotatedSentence>(*ann), opts.ngram_min, opts.ngram_max);
    }
    case FeatureBlock::kMorph: {
      const auto* ann = annotation_for(inputs, inst.id);
      if (!ann) throw DataError("missing annotations for instance ids: " + inst.id);
      return morph_feature_counts(std::span<const AnnotatedSentence>(*ann));
    }
    case FeatureBlock::kEmbedding:
      break;
  }
  throw UsageError("block has no symbol representation");
}

FittedPipeline::FittedPipeline(std::vector<FittedBlock> blocks) : blocks_(std::move(blocks)) {
  std::size_t offset = 0;
  for (auto& b : blocks_) {
    if (b.offset != offset) throw DataError("pipeline block offsets do not partition the space");
    offset += b.dimension;
  }
  dimension_ = offset;
}

const FittedBlock* FittedPipeline::find(FeatureBlock b) const {
  for (const auto& blk : blocks_) {
    if (blk.kind == b) return &blk;
  }
  return nullptr;
}

SparseVector FittedPipeline::transform_block(std::size_t block_index, const Instance& inst,
                                             const FeatureInputs& inputs) const {
  const auto& blk = blocks_.at(block_index);
  std::vector<SparseEntry> entries;
  if (blk.kind == FeatureBlock::kEmbedding) {
    const auto& vec = embedding_for(inputs, inst.id);
    if (vec.size() != blk.dimension) throw DataError("embedding dimension mismatch for " + inst.id);
    for (std::size_t i = 0; i < vec.size(); ++i) {
      const double z = (vec[i] - blk.mean[i]) / blk.stddev[i];
      if (z != 0.0) entries.push_back({static_cast<std::uint32_t>(i), z});
    }
  } else {
    auto counts = vectorize_counts(block_symbols(blk.kind, blk.options, inst, inputs),
                                   blk.vocabulary);
    if (blk.kind == FeatureBlock::kWordTfidf) {
      if (blk.options.sublinear_tf) {
        std::vector<SparseEntry> tf(counts.entries());
        for (auto& e : tf) e.value = 1.0 + std::log(e.value);
        counts = SparseVector(counts.dimension(), std::move(tf));
      }
      counts = transform_tfidf(counts, blk.idf);
    }
    entries = counts.entries();
  }
  if (blk.options.l2_normalize) l2_normalize(entries);
  return SparseVector(blk.dimension, std::move(entries));
}

SparseVector FittedPipeline::transform(const Instance& inst, const FeatureInputs& inputs) const {
  std::vector<SparseEntry> all;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto part = transform_block(b, inst, inputs);
    const auto off = static_cast<std::uint32_t>(blocks_[b].offset);
    for (const auto& e : part) all.push_back({e.index + off, e.value});
  }
  return SparseVector(dimension_, std::move(all));
}

std::vector<SparseVector> FittedPipeline::transform_all(const Dataset& d,
                                                        const FeatureInputs& inputs) const {
  std::vector<SparseVector> rows;
  rows.reserve(d.size());
  for (const auto& inst : d.instances) rows.push_back(transform(inst, inputs));
  return rows;
}

FittedPipeline fit_pipeline(const Dataset& train, const FeatureInputs& inputs,
                            const PipelineConfig& cfg) {
  cfg.validate();
  if (train.instances.empty()) throw DataError("cannot fit a pipeline on an empty dataset");
  check_coverage(train, inputs, cfg);

  std::vector<FittedBlock> blocks;
  std::size_t offset = 0;
  for (auto kind : kFeatureBlockOrder) {
    const auto& opts = cfg[kind];
    if (!opts.enabled) continue;
    FittedBlock blk;
    blk.kind = kind;
    blk.options = opts;
    blk.offset = offset;
    if (kind == FeatureBlock::kEmbedding) {
      const std::size_t dim = cfg.embedding_dim;
      blk.mean.assign(dim, 0.0);
      blk.stddev.assign(dim, 0.0);
      for (const auto& inst : train.instances) {
        const auto& v = embedding_for(inputs, inst.id);
        for (std::size_t i = 0; i < dim; ++i) blk.mean[i] += v[i];
      }
      const double n = static_cast<double>(train.size());
      for (auto& m : blk.mean) m /= n;
      for (const auto& inst : train.instances) {
        const auto& v = embedding_for(inputs, inst.id);
        for (std::size_t i = 0; i < dim; ++i) {
          const double d = v[i] - blk.mean[i];
          blk.stddev[i] += d * d;
        }
      }
      for (auto& s : blk.stddev) s = std::max(std::sqrt(s / n), 1e-8);
      blk.dimension = dim;
    } else {
      std::vector<NgramMultiset> docs;
      docs.reserve(train.size());
      for (const auto& inst : train.instances) {
        docs.push_back(block_symbols(kind, opts, inst, inputs));
      }
      try {
        blk.vocabulary = fit_vocabulary(docs, opts.min_df, opts.max_features);
      } catch (const DataError& e) {
        throw DataError(std::string(block_name(kind)) + ": " + e.what());
      }
      if (kind == FeatureBlock::kWordTfidf) blk.idf = fit_idf(blk.vocabulary);
      blk.dimension = blk.vocabulary.size();
    }
    offset += blk.dimension;
    blocks.push_back(std::move(blk));
  }
  return FittedPipeline(std::move(blocks));
}

namespace {

constexpr std::string_view kPipeMagic = "STYLOPIPE";
constexpr char kPipeVersion = '1';

}  // namespace

void FittedPipeline::write(std::ostream& out) const {
  BinaryWriter w(out);
  w.bytes(kPipeMagic);
  w.u8(static_cast<std::uint8_t>(kPipeVersion));
  w.u64(dimension_);
  w.u32(static_cast<std::uint32_t>(blocks_.size()));
  for (const auto& b : blocks_) {
    w.u8(static_cast<std::uint8_t>(b.kind));
    w.u8(static_cast<std::uint8_t>((b.options.l2_normalize ? 1 : 0) |
                                   (b.options.sublinear_tf ? 2 : 0)));
    w.i64(b.options.min_df);
    w.u64(b.options.max_features.value_or(0));
    w.u32(static_cast<std::uint32_t>(b.options.ngram_min));
    w.u32(static_cast<std::uint32_t>(b.options.ngram_max));
    w.u64(b.offset);
    w.u64(b.dimension);
    if (b.kind == FeatureBlock::kEmbedding) {
      for (double m : b.mean) w.f64(m);
      for (double s : b.stddev) w.f64(s);
      continue;
    }
    w.u64(static_cast<std::uint64_t>(b.vocabulary.n_documents()));
    for (std::size_t i = 0; i < b.vocabulary.size(); ++i) {
      w.str(b.vocabulary.symbol(i));
      w.i64(b.vocabulary.document_frequency(i));
    }
    if (b.kind == FeatureBlock::kWordTfidf) {
      for (double x : b.idf.idf) w.f64(x);
    }
  }
}

FittedPipeline FittedPipeline::read(std::istream& in) {
  BinaryReader r(in, "pipeline file");
  std::string magic(kPipeMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (static_cast<std::size_t>(in.gcount()) != magic.size() || magic != kPipeMagic) {
    throw DataError("not a pipeline file");
  }
  const char version = static_cast<char>(r.u8());
  if (version != kPipeVersion) {
    throw DataError(std::string("unsupported pipeline version '") + version +
                    "' (supported: 1)");
  }
  const auto total = r.u64();
  const auto n_blocks = r.u32();
  if (n_blocks > kFeatureBlockOrder.size()) r.corrupt("block count");
  std::vector<FittedBlock> blocks;
  for (std::uint32_t k = 0; k < n_blocks; ++k) {
    FittedBlock b;
    const auto kind = r.u8();
    if (kind >= kFeatureBlockOrder.size()) r.corrupt("block kind");
    b.kind = static_cast<FeatureBlock>(kind);
    const auto flags = r.u8();
    b.options.enabled = true;
    b.options.l2_normalize = (flags & 1) != 0;
    b.options.sublinear_tf = (flags & 2) != 0;
    b.options.min_df = r.i64();
    if (const auto mf = r.u64(); mf != 0) b.options.max_features = static_cast<std::size_t>(mf);
    b.options.ngram_min = static_cast<int>(r.u32());
    b.options.ngram_max = static_cast<int>(r.u32());
    b.offset = static_cast<std::size_t>(r.u64());
    b.dimension = static_cast<std::size_t>(r.u64());
    if (b.dimension > total) r.corrupt("block dimension");
    if (b.kind == FeatureBlock::kEmbedding) {
      for (std::size_t i = 0; i < b.dimension; ++i) b.mean.push_back(r.f64());
      for (std::size_t i = 0; i < b.dimension; ++i) b.stddev.push_back(r.f64());
    } else {
      const auto n_docs = static_cast<std::int64_t>(r.u64());
      std::vector<std::string> symbols;
      std::vector<std::int64_t> df;
      for (std::size_t i = 0; i < b.dimension; ++i) {
        symbols.push_back(r.str());
        df.push_back(r.i64());
      }
      b.vocabulary = Vocabulary::from_parts(std::move(symbols), std::move(df), n_docs);
      if (b.kind == FeatureBlock::kWordTfidf) {
        for (std::size_t i = 0; i < b.dimension; ++i) b.idf.idf.push_back(r.f64());
      }
    }
    blocks.push_back(std::move(b));
  }
  FittedPipeline p(std::move(blocks));
  if (p.dimension() != total) r.corrupt("total dimension");
  return p;
}

void FittedPipeline::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write(out);
  if (!out) throw DataError("write failed for " + path.string());
}

FittedPipeline FittedPipeline::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read(in);
}

}  // namespace stylo
