#include "stylo/annotate.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "stylo/error.h"
#include "stylo/text_util.h"

namespace stylo {

void NgramMultiset::add(std::string symbol, std::int64_t count) {
  if (count <= 0) return;
  entries_[std::move(symbol)] += count;
  total_ += count;
}

void NgramMultiset::merge(const NgramMultiset& other) {
  for (const auto& [sym, c] : other.entries_) entries_[sym] += c;
  total_ += other.total_;
}

std::int64_t NgramMultiset::count(std::string_view symbol) const {
  const auto it = entries_.find(symbol);
  return it == entries_.end() ? 0 : it->second;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  const auto bounds = utf8_boundaries(text);
  const std::size_t n_chars = bounds.size() - 1;
  std::vector<char32_t> cps(n_chars);
  for (std::size_t i = 0; i < n_chars; ++i) {
    std::size_t pos = bounds[i];
    cps[i] = utf8_next(text, pos);
  }
  const auto slice = [&](std::size_t a, std::size_t b) {
    return std::string(text.substr(bounds[a], bounds[b] - bounds[a]));
  };

  std::size_t i = 0;
  while (i < n_chars) {
    while (i < n_chars && is_unicode_space(cps[i])) ++i;
    if (i >= n_chars) break;
    std::size_t end = i;
    while (end < n_chars && !is_unicode_space(cps[end])) ++end;

    std::size_t lo = i;
    while (lo < end && is_punctuation(cps[lo])) {
      out.push_back(Token{slice(lo, lo + 1), {}, {}});
      ++lo;
    }
    std::size_t hi = end;
    while (hi > lo && is_punctuation(cps[hi - 1])) --hi;
    if (hi > lo) out.push_back(Token{slice(lo, hi), {}, {}});
    for (std::size_t k = hi; k < end; ++k) out.push_back(Token{slice(k, k + 1), {}, {}});
    i = end;
  }
  return out;
}

NgramMultiset word_unigrams(std::string_view text) {
  NgramMultiset m;
  for (auto& tok : tokenize(text)) m.add("w:" + tok.form);
  return m;
}

NgramMultiset char_ngrams(std::string_view text, int n_min, int n_max) {
  if (n_min < 1 || n_max < n_min) {
    throw UsageError("char n-gram range must satisfy 1 <= n_min <= n_max");
  }
  NgramMultiset m;
  const auto bounds = utf8_boundaries(text);
  const std::size_t n_chars = bounds.size() - 1;
  for (int n = n_min; n <= n_max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    if (len > n_chars) break;
    const std::string prefix = "c" + std::to_string(n) + ":";
    for (std::size_t i = 0; i + len <= n_chars; ++i) {
      m.add(prefix + std::string(text.substr(bounds[i], bounds[i + len] - bounds[i])));
    }
  }
  return m;
}

namespace {

void add_pos_ngrams(const AnnotatedSentence& s, int n_min, int n_max, NgramMultiset& m) {
  if (n_min < 1 || n_max < n_min) {
    throw UsageError("POS n-gram range must satisfy 1 <= n_min <= n_max");
  }
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (!s.tokens[i].pos) {
      throw DataError("instance '" + s.instance_id + "': token " + std::to_string(i) +
                      " ('" + s.tokens[i].form + "') has no POS tag");
    }
  }
  const std::size_t len = s.tokens.size();
  for (int n = n_min; n <= n_max; ++n) {
    const auto w = static_cast<std::size_t>(n);
    if (w > len) break;
    const std::string prefix = "p" + std::to_string(n) + ":";
    for (std::size_t i = 0; i + w <= len; ++i) {
      std::string sym = prefix;
      for (std::size_t k = 0; k < w; ++k) {
        if (k > 0) sym += '_';
        sym += *s.tokens[i + k].pos;
      }
      m.add(std::move(sym));
    }
  }
}

}  // namespace

NgramMultiset pos_ngrams(const AnnotatedSentence& s, int n_min, int n_max) {
  NgramMultiset m;
  add_pos_ngrams(s, n_min, n_max, m);
  return m;
}

NgramMultiset pos_ngrams(std::span<const AnnotatedSentence> sentences, int n_min, int n_max) {
  NgramMultiset m;
  for (const auto& s : sentences) add_pos_ngrams(s, n_min, n_max, m);
  return m;
}

NgramMultiset morph_feature_counts(const AnnotatedSentence& s) {
  NgramMultiset m;
  for (const auto& tok : s.tokens) {
    for (const auto& f : tok.morph) m.add("m:" + f);
  }
  return m;
}

NgramMultiset morph_feature_counts(std::span<const AnnotatedSentence> sentences) {
  NgramMultiset m;
  for (const auto& s : sentences) m.merge(morph_feature_counts(s));
  return m;
}

std::vector<AnnotatedSentence> parse_conllu(std::istream& in) {
  std::vector<AnnotatedSentence> out;
  AnnotatedSentence current;
  std::optional<std::string> current_id;
  std::size_t block_start = 0;
  bool in_block = false;
  std::string line;
  std::size_t line_no = 0;

  const auto flush = [&] {
    if (!in_block) return;
    if (!current_id) {
      throw DataError("CoNLL-U sentence starting at line " + std::to_string(block_start) +
                      " has no '# instance_id = ...' comment");
    }
    current.instance_id = *current_id;
    out.push_back(std::move(current));
    current = AnnotatedSentence{};
    current_id.reset();
    in_block = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (!in_block) {
      in_block = true;
      block_start = line_no;
    }
    if (line.front() == '#') {
      const std::string_view body = trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos && trim(body.substr(0, eq)) == "instance_id") {
        const auto value = trim(body.substr(eq + 1));
        if (value.empty()) {
          throw DataError("line " + std::to_string(line_no) + ": empty instance_id");
        }
        current_id = std::string(value);
      }
      continue;
    }
    const auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw DataError("line " + std::to_string(line_no) + ": expected 10 columns, got " +
                      std::to_string(cols.size()));
    }
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) {
      continue;
    }
    Token tok;
    tok.form = std::string(cols[1]);
    if (tok.form.empty()) throw DataError("line " + std::to_string(line_no) + ": empty FORM");
    if (cols[3] != "_") tok.pos = std::string(cols[3]);
    if (cols[5] != "_" && !cols[5].empty()) {
      for (auto feat : split(cols[5], '|')) {
        if (std::count(feat.begin(), feat.end(), '=') != 1) {
          throw DataError("line " + std::to_string(line_no) + ": malformed feature '" +
                          std::string(feat) + "'");
        }
        tok.morph.emplace_back(feat);
      }
    }
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return out;
}

std::vector<AnnotatedSentence> load_conllu(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CoNLL-U file " + path.string());
  return parse_conllu(in);
}

void write_conllu(std::span<const AnnotatedSentence> sentences, std::ostream& out) {
  for (const auto& s : sentences) {
    out << "# instance_id = " << s.instance_id << '\n';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      out << (i + 1) << '\t' << t.form << "\t_\t" << t.pos.value_or("_") << "\t_\t";
      if (t.morph.empty()) {
        out << '_';
      } else {
        for (std::size_t k = 0; k < t.morph.size(); ++k) {
          if (k > 0) out << '|';
          out << t.morph[k];
        }
      }
      out << "\t_\t_\t_\t_\n";
    }
    out << '\n';
  }
}

AnnotationIndex group_by_instance(std::vector<AnnotatedSentence> sentences) {
  AnnotationIndex index;
  for (auto& s : sentences) {
    auto& slot = index[s.instance_id];
    slot.push_back(std::move(s));
  }
  return index;
}

namespace {

constexpr const char* kStandardLexicon =
#include "tagger_lexicon.inc"
    ;

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool ends_with_rule(std::string_view word, std::string_view suffix) {
  return word.size() >= suffix.size() + 2 && word.ends_with(suffix);
}

bool any_suffix(std::string_view word, std::initializer_list<std::string_view> suffixes) {
  return std::any_of(suffixes.begin(), suffixes.end(),
                     [&](std::string_view s) { return ends_with_rule(word, s); });
}

}  // namespace

const BuiltinTagger& BuiltinTagger::standard() {
  static const BuiltinTagger tagger = from_tsv_text(kStandardLexicon);
  return tagger;
}

BuiltinTagger BuiltinTagger::from_tsv_text(std::string_view text) {
  BuiltinTagger t;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": expected 'form<TAB>UPOS'");
    }
    t.lexicon_.emplace(std::string(cols[0]), std::string(cols[1]));
  }
  return t;
}

BuiltinTagger BuiltinTagger::from_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_tsv_text(ss.str());
}

std::string BuiltinTagger::tag(std::string_view form) const {
  if (auto it = lexicon_.find(std::string(form)); it != lexicon_.end()) return it->second;
  const std::string lower = ascii_lower(form);
  if (auto it = lexicon_.find(lower); it != lexicon_.end()) return it->second;

  std::vector<char32_t> cps;
  for (std::size_t pos = 0; pos < form.size();) cps.push_back(utf8_next(form, pos));
  constexpr std::u32string_view kSymbols = U"$%&+=<>@#~^|";
  const auto all = [&](auto pred) { return !cps.empty() && std::all_of(cps.begin(), cps.end(), pred); };

  if (all([&](char32_t c) { return kSymbols.find(c) != std::u32string_view::npos; })) return "SYM";
  if (all([](char32_t c) { return is_punctuation(c); })) return "PUNCT";
  if (std::any_of(cps.begin(), cps.end(), [](char32_t c) { return c >= '0' && c <= '9'; }) &&
      all([](char32_t c) {
        return (c >= '0' && c <= '9') || c == '.' || c == ',' || c == ':' || c == '/' || c == '-';
      })) {
    return "NUM";
  }
  if (!cps.empty() && cps.front() >= 'A' && cps.front() <= 'Z') return "PROPN";
  if (ends_with_rule(lower, "ly")) return "ADV";
  if (ends_with_rule(lower, "ing")) return "VERB";
  if (ends_with_rule(lower, "ed")) return "VERB";
  if (any_suffix(lower, {"ize", "ise", "ify", "ate"})) return "VERB";
  if (any_suffix(lower, {"ous", "ful", "ive", "able", "ible", "ical", "less", "ish"})) return "ADJ";
  if (any_suffix(lower, {"tion", "sion", "ment", "ness", "ity", "ism", "ist", "ance", "ence"})) {
    return "NOUN";
  }
  return "NOUN";
}

std::vector<Token> builtin_pos_tag(std::vector<Token> tokens) {
  const auto& tagger = BuiltinTagger::standard();
  for (auto& t : tokens) t.pos = tagger.tag(t.form);
  return tokens;
}

AnnotatedSentence builtin_annotate(std::string instance_id, std::string_view text) {
  return AnnotatedSentence{std::move(instance_id), builtin_pos_tag(tokenize(text))};
}

}  // namespace stylo
