#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stylo/annotate.h"
#include "stylo/corpus.h"
#include "stylo/features.h"

namespace stylo {

// Two desk-scale stand-ins for the original news corpora:
//   subjectivity  sentences labelled OBJ / SUBJ (60/40)
//   bias          headline + body articles labelled left / center / right
//                 (ordinal ranks 0, 1, 2)
// Each class draws from its own generator: class-specific word rankings
// (Zipf weights over seeded permutations), clause templates, function-word,
// punctuation and sentence-length rates. Every document mixes in a random
// share of another class's clauses so the task is not trivially separable.
enum class SynthTask { kSubjectivity, kBias };

std::string_view synth_task_name(SynthTask t);
SynthTask parse_synth_task(std::string_view name);

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n = 600;  // at least 50
  Fraction train_fraction{66, 100};
  std::size_t embedding_dim = 16;
};

struct SynthDoc {
  std::string id;
  std::string headline;  // bias only
  std::string body;
  std::string label;
  std::vector<AnnotatedSentence> sentences;  // gold POS and morphology
};

struct SyntheticCorpus {
  SynthTask task{};
  SynthConfig config;
  LabelSpace labels;
  std::vector<SynthDoc> docs;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  Embeddings embeddings;

  // Instances with the text the loader would build ("<headline>\n\n<body>"
  // for bias).
  Dataset dataset() const;
};

// Throws UsageError for n < 50.
SyntheticCorpus generate_synthetic_corpus(SynthTask task, const SynthConfig& cfg);

// Writes train.tsv, test.tsv, annotations.conllu, embeddings.txt and a
// ready-to-run experiment.ini into `dir` (created if needed).
void write_synthetic_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir);

}  // namespace stylo
