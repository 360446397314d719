#pragma once

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

namespace stylo {

struct Token {
  std::string form;
  std::optional<std::string> pos;       // Universal POS tag
  std::vector<std::string> morph;       // "Feature=Value" entries, file order

  bool operator==(const Token&) const = default;
};

struct AnnotatedSentence {
  std::string instance_id;
  std::vector<Token> tokens;

  bool operator==(const AnnotatedSentence&) const = default;
};

// Sentences grouped by instance id; multi-sentence articles keep file order.
using AnnotationIndex = std::map<std::string, std::vector<AnnotatedSentence>, std::less<>>;

// Counted symbols. Symbols carry a family prefix ("w:", "c{n}:", "p{n}:",
// "m:") so multisets from different families never collide.
class NgramMultiset {
 public:
  void add(std::string symbol, std::int64_t count = 1);
  void merge(const NgramMultiset& other);

  const std::map<std::string, std::int64_t, std::less<>>& entries() const noexcept {
    return entries_;
  }
  std::int64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::int64_t count(std::string_view symbol) const;

  bool operator==(const NgramMultiset&) const = default;

 private:
  std::map<std::string, std::int64_t, std::less<>> entries_;
  std::int64_t total_ = 0;
};

// Splits on Unicode whitespace, then peels leading and trailing punctuation
// characters off each chunk as one-character tokens. Case is preserved.
std::vector<Token> tokenize(std::string_view text);

// Word unigrams over tokenize(text), prefixed "w:".
NgramMultiset word_unigrams(std::string_view text);

// All contiguous code-point substrings of length n_min..n_max over the raw
// text, prefixed "c{n}:".
NgramMultiset char_ngrams(std::string_view text, int n_min = 1, int n_max = 4);

// n-grams over the UPOS sequence joined with '_', prefixed "p{n}:". Throws
// DataError naming the first token without a tag.
NgramMultiset pos_ngrams(const AnnotatedSentence& s, int n_min = 1, int n_max = 4);
// Sum over sentences; n-grams never span a sentence boundary.
NgramMultiset pos_ngrams(std::span<const AnnotatedSentence> sentences, int n_min = 1,
                         int n_max = 4);

// Every "Feature=Value" entry, once per token occurrence, prefixed "m:".
NgramMultiset morph_feature_counts(const AnnotatedSentence& s);
NgramMultiset morph_feature_counts(std::span<const AnnotatedSentence> sentences);

// Restricted CoNLL-U reader: FORM, UPOS and FEATS are kept; multiword ranges
// ("3-4") and empty nodes ("3.1") are skipped. Each sentence must carry an
// `# instance_id = <id>` comment.
std::vector<AnnotatedSentence> load_conllu(const std::filesystem::path& path);
std::vector<AnnotatedSentence> parse_conllu(std::istream& in);
// Writes the columns the reader consumes; the others are "_".
void write_conllu(std::span<const AnnotatedSentence> sentences, std::ostream& out);

AnnotationIndex group_by_instance(std::vector<AnnotatedSentence> sentences);

// Lexicon lookup (exact form, then ASCII-lowercased) followed by ordered
// suffix/shape rules:
//   1. all symbol characters ($%&+=<>@#~^|)  -> SYM
//   2. all punctuation                        -> PUNCT
//   3. digits with optional .,:/- separators  -> NUM
//   4. capitalised unknown word               -> PROPN
//   5. -ly                                    -> ADV
//   6. -ing                                   -> VERB
//   7. -ed                                    -> VERB
//   8. -ize/-ise/-ify/-ate                    -> VERB
//   9. -ous/-ful/-ive/-able/-ible/-ical/-less/-ish -> ADJ
//  10. -tion/-sion/-ment/-ness/-ity/-ism/-ist/-ance/-ence -> NOUN
// Suffix rules need at least two characters before the suffix. Anything
// else is NOUN.
class BuiltinTagger {
 public:
  // Tagger over the lexicon compiled into the library (data/tagger_lexicon.tsv).
  static const BuiltinTagger& standard();
  // Lexicon TSV: `form \t UPOS` per line, '#' comments allowed.
  static BuiltinTagger from_tsv(const std::filesystem::path& path);
  static BuiltinTagger from_tsv_text(std::string_view text);

  std::string tag(std::string_view form) const;
  std::size_t lexicon_size() const noexcept { return lexicon_.size(); }

 private:
  std::unordered_map<std::string, std::string> lexicon_;
};

// Fills every token's pos using the standard tagger; morph is left untouched.
std::vector<Token> builtin_pos_tag(std::vector<Token> tokens);

// tokenize + builtin_pos_tag, wrapped as a single sentence.
AnnotatedSentence builtin_annotate(std::string instance_id, std::string_view text);

}  // namespace stylo
