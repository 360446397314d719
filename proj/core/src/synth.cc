#include "stylo/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "stylo/error.h"
#include "stylo/rng.h"
#include "stylo/text_util.h"

namespace stylo {
namespace {

// --- lexicon -------------------------------------------------------------------

struct Word {
  const char* form;
  const char* feats;  // "_" for none
};

// Nouns carry singular and plural forms.
struct Noun {
  const char* sing;
  const char* plur;
};

struct Verb {
  const char* base;
  const char* past;
  const char* third;
};

constexpr Noun kNeutralNouns[] = {
    {"report", "reports"},     {"committee", "committees"}, {"official", "officials"},
    {"city", "cities"},        {"budget", "budgets"},       {"agency", "agencies"},
    {"minister", "ministers"}, {"council", "councils"},     {"company", "companies"},
    {"study", "studies"},      {"region", "regions"},       {"meeting", "meetings"},
    {"member", "members"},     {"plan", "plans"},           {"court", "courts"},
    {"statement", "statements"}, {"program", "programs"},   {"market", "markets"},
    {"school", "schools"},     {"price", "prices"},         {"survey", "surveys"},
    {"office", "offices"},     {"team", "teams"},           {"project", "projects"},
    {"decision", "decisions"}, {"measure", "measures"},     {"group", "groups"},
    {"document", "documents"}, {"week", "weeks"},           {"year", "years"},
    {"percent", "percent"},    {"vote", "votes"},           {"law", "laws"},
    {"spokesman", "spokesmen"}, {"province", "provinces"},  {"hospital", "hospitals"},
};

constexpr Noun kLeftNouns[] = {
    {"worker", "workers"},   {"union", "unions"},         {"climate", "climates"},
    {"equality", "equalities"}, {"community", "communities"}, {"wage", "wages"},
    {"healthcare", "healthcare"}, {"refugee", "refugees"}, {"minority", "minorities"},
    {"activist", "activists"}, {"pollution", "pollution"}, {"tenant", "tenants"},
};

constexpr Noun kRightNouns[] = {
    {"taxpayer", "taxpayers"}, {"border", "borders"},   {"freedom", "freedoms"},
    {"tradition", "traditions"}, {"business", "businesses"}, {"tax", "taxes"},
    {"police", "police"},      {"family", "families"}, {"faith", "faiths"},
    {"sovereignty", "sovereignty"}, {"entrepreneur", "entrepreneurs"}, {"army", "armies"},
};

constexpr Verb kVerbs[] = {
    {"approve", "approved", "approves"},   {"announce", "announced", "announces"},
    {"publish", "published", "publishes"}, {"review", "reviewed", "reviews"},
    {"reject", "rejected", "rejects"},     {"discuss", "discussed", "discusses"},
    {"confirm", "confirmed", "confirms"},  {"propose", "proposed", "proposes"},
    {"receive", "received", "receives"},   {"report", "reported", "reports"},
    {"increase", "increased", "increases"}, {"reduce", "reduced", "reduces"},
    {"open", "opened", "opens"},           {"support", "supported", "supports"},
    {"sign", "signed", "signs"},           {"release", "released", "releases"},
    {"expand", "expanded", "expands"},     {"cut", "cut", "cuts"},
    {"hold", "held", "holds"},             {"win", "won", "wins"},
    {"lose", "lost", "loses"},             {"build", "built", "builds"},
    {"fund", "funded", "funds"},           {"defend", "defended", "defends"},
};

constexpr const char* kNeutralAdj[] = {
    "annual", "federal", "local", "new", "former", "regional", "public", "national",
    "official", "recent", "final", "monthly", "central", "economic", "legal", "current",
};

constexpr const char* kEvaluativeAdj[] = {
    "terrible", "wonderful", "absurd", "brilliant", "shameful", "outrageous", "ridiculous",
    "amazing", "disgraceful", "pathetic", "excellent", "awful", "stupid", "beautiful",
    "dangerous", "honest",
};

constexpr const char* kAdverbs[] = {
    "really", "very", "truly", "clearly", "simply", "totally", "obviously", "deeply",
    "frankly", "honestly", "absolutely", "surely",
};

constexpr const char* kNeutralAdverbs[] = {"also", "later", "recently", "previously", "again"};

constexpr const char* kAdps[] = {"in", "on", "at", "of", "with", "for", "from", "by",
                                 "after", "during", "under", "over"};

constexpr const char* kFeelVerbs[] = {"think", "believe", "feel", "guess", "suspect"};

constexpr Word kDefArt{"the", "Definite=Def|PronType=Art"};
constexpr Word kIndefArt{"a", "Definite=Ind|PronType=Art"};
constexpr Word kDemSing{"this", "Number=Sing|PronType=Dem"};
constexpr Word kDemPlur{"these", "Number=Plur|PronType=Dem"};

constexpr Word kSubjPronouns[] = {
    {"I", "Case=Nom|Number=Sing|Person=1|PronType=Prs"},
    {"we", "Case=Nom|Number=Plur|Person=1|PronType=Prs"},
    {"you", "Case=Nom|Person=2|PronType=Prs"},
    {"they", "Case=Nom|Number=Plur|Person=3|PronType=Prs"},
};

constexpr Word kModals[] = {
    {"should", "VerbForm=Fin"}, {"must", "VerbForm=Fin"}, {"can", "VerbForm=Fin"},
    {"will", "VerbForm=Fin"},   {"would", "VerbForm=Fin"},
};

constexpr Word kCopulaPres{"is", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin"};
constexpr Word kCopulaPast{"was", "Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin"};
constexpr Word kCopulaPlur{"are", "Mood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin"};

// --- generator state --------------------------------------------------------------

// Sampling weights over a list: Zipf(0.9) over a class-specific permutation.
std::vector<double> zipf_weights(std::size_t n, SplitMix64& perm_rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span<std::size_t>(order), perm_rng);
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[order[r]] = 1.0 / std::pow(static_cast<double>(r + 1), 0.9);
  return w;
}

std::size_t pick(const std::vector<double>& w, SplitMix64& rng) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

bool coin(SplitMix64& rng, double p) { return rng.uniform01() < p; }

// One class's generator.
struct Style {
  double subjective_clause = 0.1;  // chance a clause uses an opinion template
  double clause_continue = 0.3;
  double pp_continue = 0.5;
  double adjective = 0.3;
  double evaluative = 0.1;         // share of adjectives drawn from the evaluative list
  double adverb = 0.1;
  double number = 0.2;             // PP with a cardinal
  double plural = 0.3;
  double exclaim = 0.0;
  double question = 0.0;
  double past = 0.8;               // objective clauses in the past tense
  int topic = -1;                  // 0 left, 2 right; -1 none
  double topic_rate = 0.0;

  // Class-specific rankings.
  std::vector<double> w_neutral_nouns, w_topic_left, w_topic_right, w_verbs, w_neutral_adj,
      w_eval_adj, w_adverbs, w_adps, w_feel;
};

Style make_style(Style base, std::uint64_t seed) {
  SplitMix64 r(seed);
  base.w_neutral_nouns = zipf_weights(std::size(kNeutralNouns), r);
  base.w_topic_left = zipf_weights(std::size(kLeftNouns), r);
  base.w_topic_right = zipf_weights(std::size(kRightNouns), r);
  base.w_verbs = zipf_weights(std::size(kVerbs), r);
  base.w_neutral_adj = zipf_weights(std::size(kNeutralAdj), r);
  base.w_eval_adj = zipf_weights(std::size(kEvaluativeAdj), r);
  base.w_adverbs = zipf_weights(std::size(kAdverbs), r);
  base.w_adps = zipf_weights(std::size(kAdps), r);
  base.w_feel = zipf_weights(std::size(kFeelVerbs), r);
  return base;
}

class SentenceBuilder {
 public:
  explicit SentenceBuilder(SplitMix64& rng) : rng_(rng) {}

  void push(std::string form, const char* pos, const char* feats) {
    if (!tokens_.empty() && tokens_.back().form == "a" &&
        std::string_view("aeiou").find(form[0]) != std::string_view::npos) {
      tokens_.back().form = "an";
    }
    Token t;
    t.form = std::move(form);
    t.pos = pos;
    if (std::string_view(feats) != "_") {
      for (auto f : split(feats, '|')) t.morph.emplace_back(f);
    }
    tokens_.push_back(std::move(t));
  }

  void clause(const Style& s) {
    if (coin(rng_, s.subjective_clause)) {
      subjective_clause(s);
    } else {
      objective_clause(s);
    }
  }

  void conj() {
    push(",", "PUNCT", "_");
    push(coin(rng_, 0.4) ? "but" : "and", "CCONJ", "_");
  }

  void end(const Style& s, bool headline) {
    if (!headline) {
      const double u = rng_.uniform01();
      push(u < s.exclaim ? "!" : (u < s.exclaim + s.question ? "?" : "."), "PUNCT", "_");
    }
    auto& first = tokens_.front().form;
    if (first[0] >= 'a' && first[0] <= 'z') first[0] = static_cast<char>(first[0] - 'a' + 'A');
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  std::vector<Token> take() { return std::move(tokens_); }

 private:
  void noun_phrase(const Style& s, bool allow_demonstrative) {
    const bool plural = coin(rng_, s.plural);
    if (allow_demonstrative && coin(rng_, 0.25)) {
      const Word& d = plural ? kDemPlur : kDemSing;
      push(d.form, "DET", d.feats);
    } else if (!plural && coin(rng_, 0.3)) {
      push(kIndefArt.form, "DET", kIndefArt.feats);
    } else {
      push(kDefArt.form, "DET", kDefArt.feats);
    }
    if (coin(rng_, s.adjective)) adjective(s);
    const Noun& n = noun(s);
    push(plural ? n.plur : n.sing, "NOUN", plural ? "Number=Plur" : "Number=Sing");
    last_plural_ = plural;
  }

  void adjective(const Style& s) {
    if (coin(rng_, s.evaluative)) {
      push(kEvaluativeAdj[pick(s.w_eval_adj, rng_)], "ADJ", "Degree=Pos");
    } else {
      push(kNeutralAdj[pick(s.w_neutral_adj, rng_)], "ADJ", "Degree=Pos");
    }
  }

  void adverb(const Style& s) {
    if (coin(rng_, s.adverb)) push(kAdverbs[pick(s.w_adverbs, rng_)], "ADV", "_");
  }

  const Noun& noun(const Style& s) {
    if (s.topic >= 0 && coin(rng_, s.topic_rate)) {
      return s.topic == 0 ? kLeftNouns[pick(s.w_topic_left, rng_)]
                          : kRightNouns[pick(s.w_topic_right, rng_)];
    }
    return kNeutralNouns[pick(s.w_neutral_nouns, rng_)];
  }

  void prep_phrase(const Style& s) {
    push(kAdps[pick(s.w_adps, rng_)], "ADP", "_");
    if (coin(rng_, s.number)) {
      push(std::to_string(2 + rng_.uniform(2024)), "NUM", "NumType=Card");
      push(noun(s).plur, "NOUN", "Number=Plur");
    } else {
      noun_phrase(s, false);
    }
  }

  // "the council approved the new budget in 12 regions"
  void objective_clause(const Style& s) {
    noun_phrase(s, true);
    const bool subject_plural = last_plural_;
    if (coin(rng_, 0.15)) {
      push(kNeutralAdverbs[rng_.uniform(std::size(kNeutralAdverbs))], "ADV", "_");
    }
    const Verb& v = kVerbs[pick(s.w_verbs, rng_)];
    if (coin(rng_, s.past)) {
      push(v.past, "VERB", "Mood=Ind|Tense=Past|VerbForm=Fin");
    } else if (subject_plural) {
      push(v.base, "VERB", "Mood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin");
    } else {
      push(v.third, "VERB", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin");
    }
    noun_phrase(s, false);
    do {
      prep_phrase(s);
    } while (coin(rng_, s.pp_continue) && tokens_.size() < 60);
  }

  void subjective_clause(const Style& s) {
    switch (rng_.uniform(3)) {
      case 0: {  // "we should not reject this plan"
        const Word& p = kSubjPronouns[rng_.uniform(std::size(kSubjPronouns))];
        push(p.form, "PRON", p.feats);
        const Word& m = kModals[rng_.uniform(std::size(kModals))];
        push(m.form, "AUX", m.feats);
        if (coin(rng_, 0.2)) push("not", "PART", "Polarity=Neg");
        adverb(s);
        push(kVerbs[pick(s.w_verbs, rng_)].base, "VERB", "VerbForm=Inf");
        noun_phrase(s, true);
        break;
      }
      case 1: {  // "the plan is really absurd"
        noun_phrase(s, true);
        const Word& cop =
            last_plural_ ? kCopulaPlur : (coin(rng_, 0.3) ? kCopulaPast : kCopulaPres);
        push(cop.form, "AUX", cop.feats);
        adverb(s);
        push(kEvaluativeAdj[pick(s.w_eval_adj, rng_)], "ADJ", "Degree=Pos");
        break;
      }
      default: {  // "I think the minister is honest"
        const Word& p = kSubjPronouns[rng_.uniform(2)];
        push(p.form, "PRON", p.feats);
        push(kFeelVerbs[pick(s.w_feel, rng_)], "VERB",
             p.form[0] == 'I' ? "Mood=Ind|Number=Sing|Person=1|Tense=Pres|VerbForm=Fin"
                              : "Mood=Ind|Number=Plur|Person=1|Tense=Pres|VerbForm=Fin");
        noun_phrase(s, false);
        push(last_plural_ ? kCopulaPlur.form : kCopulaPres.form, "AUX",
             last_plural_ ? kCopulaPlur.feats : kCopulaPres.feats);
        adverb(s);
        adjective(s);
        break;
      }
    }
  }

  SplitMix64& rng_;
  std::vector<Token> tokens_;
  bool last_plural_ = false;
};

// Forms joined by spaces; punctuation attaches to the previous token so the
// library tokenizer recovers exactly these tokens.
std::string render(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && *t.pos != "PUNCT") out += ' ';
    out += t.form;
  }
  return out;
}

// Each clause comes from one of `others` with probability `mix`; sentence
// length and final punctuation follow the document's own class.
std::vector<Token> sentence(const Style& own, std::span<const Style* const> others, double mix,
                            SplitMix64& rng, bool headline) {
  auto choose = [&]() -> const Style& {
    return (!others.empty() && coin(rng, mix)) ? *others[rng.uniform(others.size())] : own;
  };
  SentenceBuilder b(rng);
  b.clause(choose());
  while (!headline && b.size() < 60 && coin(rng, own.clause_continue)) {
    b.conj();
    b.clause(choose());
  }
  b.end(own, headline);
  return b.take();
}

// --- class definitions ----------------------------------------------------------------

Style objective_style() {
  Style s;
  s.subjective_clause = 0.08;
  s.clause_continue = 0.35;
  s.pp_continue = 0.55;
  s.adjective = 0.35;
  s.evaluative = 0.08;
  s.adverb = 0.15;
  s.number = 0.35;
  s.plural = 0.35;
  s.exclaim = 0.01;
  s.question = 0.02;
  s.past = 0.85;
  return s;
}

Style subjective_style() {
  Style s;
  s.subjective_clause = 0.7;
  s.clause_continue = 0.2;
  s.pp_continue = 0.25;
  s.adjective = 0.3;
  s.evaluative = 0.6;
  s.adverb = 0.6;
  s.number = 0.08;
  s.plural = 0.25;
  s.exclaim = 0.2;
  s.question = 0.12;
  s.past = 0.4;
  return s;
}

Style bias_style(int cls) {
  Style s = cls == 1 ? objective_style() : subjective_style();
  if (cls != 1) {
    s.subjective_clause = 0.4;
    s.exclaim = 0.1;
    s.question = 0.08;
    s.topic = cls;
    s.topic_rate = 0.35;
  }
  return s;
}

std::uint64_t class_seed(std::uint64_t seed, std::size_t cls) {
  SplitMix64 r(seed ^ 0x5ca1ab1e0ddba11ULL);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i <= cls; ++i) v = r.next();
  return v;
}

// Mean of per-word Gaussian vectors (word vectors are a pure function of the
// lowercased form and the corpus seed), rounded to 6 decimals.
std::vector<double> embed(const std::vector<AnnotatedSentence>& sentences, std::size_t dim,
                          std::uint64_t seed) {
  std::vector<double> v(dim, 0.0);
  std::size_t n = 0;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (*t.pos == "PUNCT") continue;
      std::string lower = t.form;
      for (char& c : lower) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a of the form
      for (unsigned char c : lower) h = (h ^ c) * 0x100000001b3ULL;
      SplitMix64 r(seed ^ h);
      for (auto& x : v) x += r.normal();
      ++n;
    }
  }
  for (auto& x : v) x = std::round(x / static_cast<double>(std::max<std::size_t>(n, 1)) * 1e6) / 1e6;
  for (auto& x : v) {
    if (x == 0.0) x = 0.0;  // no negative zero
  }
  return v;
}

std::string pad_id(char prefix, std::size_t i, std::size_t n) {
  std::string num = std::to_string(i + 1);
  const std::size_t width = std::to_string(n).size();
  return std::string(1, prefix) + std::string(width - num.size(), '0') + num;
}

}  // namespace

std::string_view synth_task_name(SynthTask t) {
  return t == SynthTask::kSubjectivity ? "subjectivity" : "bias";
}

SynthTask parse_synth_task(std::string_view name) {
  if (name == "subjectivity") return SynthTask::kSubjectivity;
  if (name == "bias") return SynthTask::kBias;
  throw UsageError("unknown synthetic task '" + std::string(name) +
                   "' (expected subjectivity or bias)");
}

Dataset SyntheticCorpus::dataset() const {
  Dataset d;
  d.name = std::string(synth_task_name(task));
  d.label_space = labels;
  for (const auto& doc : docs) {
    Instance inst;
    inst.id = doc.id;
    inst.text = doc.headline.empty() ? doc.body : doc.headline + "\n\n" + doc.body;
    inst.label = doc.label;
    d.instances.push_back(std::move(inst));
  }
  return d;
}

SyntheticCorpus generate_synthetic_corpus(SynthTask task, const SynthConfig& cfg) {
  if (cfg.n < 50) throw UsageError("synthetic corpus needs n >= 50, got " + std::to_string(cfg.n));
  if (cfg.embedding_dim == 0) throw UsageError("embedding dimension must be positive");
  SyntheticCorpus c;
  c.task = task;
  c.config = cfg;

  std::vector<Style> styles;
  std::vector<std::size_t> counts;
  if (task == SynthTask::kSubjectivity) {
    c.labels = LabelSpace({"OBJ", "SUBJ"});
    styles = {make_style(objective_style(), class_seed(cfg.seed, 0)),
              make_style(subjective_style(), class_seed(cfg.seed, 1))};
    const std::size_t obj = (cfg.n * 6 + 5) / 10;
    counts = {obj, cfg.n - obj};
  } else {
    c.labels = LabelSpace({"left", "center", "right"}, {0, 1, 2});
    for (int k = 0; k < 3; ++k) {
      styles.push_back(make_style(bias_style(k), class_seed(cfg.seed, static_cast<std::size_t>(k))));
    }
    const std::size_t left = (cfg.n * 30 + 50) / 100;
    const std::size_t center = (cfg.n * 39 + 50) / 100;
    counts = {left, center, cfg.n - left - center};
  }

  SplitMix64 rng(cfg.seed);
  std::vector<std::size_t> label_of;
  for (std::size_t k = 0; k < counts.size(); ++k) label_of.insert(label_of.end(), counts[k], k);
  shuffle(std::span<std::size_t>(label_of), rng);

  const char prefix = task == SynthTask::kSubjectivity ? 's' : 'b';
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const std::size_t k = label_of[i];
    std::vector<const Style*> others;
    for (std::size_t o = 0; o < styles.size(); ++o) {
      if (o != k) others.push_back(&styles[o]);
    }
    // Per-document share of foreign clauses.
    const double mix = rng.uniform(0.0, 0.5);
    SynthDoc doc;
    doc.id = pad_id(prefix, i, cfg.n);
    doc.label = c.labels.label(k);
    auto add = [&](std::vector<Token> tokens) {
      doc.sentences.push_back({doc.id, std::move(tokens)});
      return render(doc.sentences.back().tokens);
    };
    if (task == SynthTask::kSubjectivity) {
      const std::size_t n_sent = coin(rng, 0.2) ? 2 : 1;
      for (std::size_t j = 0; j < n_sent; ++j) {
        if (j) doc.body += ' ';
        doc.body += add(sentence(styles[k], others, mix, rng, false));
      }
    } else {
      doc.headline = add(sentence(styles[k], others, mix, rng, true));
      const std::size_t n_sent = 3 + rng.uniform(4);
      for (std::size_t j = 0; j < n_sent; ++j) {
        if (j) doc.body += ' ';
        doc.body += add(sentence(styles[k], others, mix, rng, false));
      }
    }
    c.docs.push_back(std::move(doc));
  }

  c.embeddings.dimension = cfg.embedding_dim;
  for (const auto& doc : c.docs) {
    c.embeddings.vectors[doc.id] = embed(doc.sentences, cfg.embedding_dim, cfg.seed);
  }

  auto [train, test] = train_test_split(c.dataset(), SplitSpec{cfg.train_fraction, cfg.seed});
  for (const auto& inst : train.instances) c.train_ids.push_back(inst.id);
  for (const auto& inst : test.instances) c.test_ids.push_back(inst.id);
  return c;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw UsageError("cannot write " + p.string());
}

std::string experiment_ini(const SyntheticCorpus& c) {
  const bool bias = c.task == SynthTask::kBias;
  std::ostringstream o;
  o << "# Synthetic " << synth_task_name(c.task) << " corpus, seed " << c.config.seed
    << ", n = " << c.config.n << ".\n"
    << "config_version = 1\n"
    << "name = synthetic-" << synth_task_name(c.task) << "\n"
    << "seed = " << c.config.seed << "\n\n"
    << "[data]\n"
    << "format = tsv\n"
    << "train = train.tsv\n"
    << "test = test.tsv\n";
  if (bias) o << "headline_field = headline\n";
  o << "labels = " << (bias ? "left,center,right" : "OBJ,SUBJ") << "\n"
    << "annotations = annotations.conllu\n"
    << "embeddings = embeddings.txt\n"
    << "embedding_dim = " << c.config.embedding_dim << "\n\n"
    << "[features]\n"
    << "blocks = word_bow,word_tfidf,char_bow,pos_bow,morph,embedding\n"
    << "ablations = true\n"
    << "char_bow.ngram = 1-4\n"
    << "char_bow.min_df = 2\n"
    << "pos_bow.ngram = 1-4\n"
    << "pos_bow.min_df = 2\n"
    << "word_bow.l2_normalize = true\n"
    << "char_bow.l2_normalize = true\n"
    << "pos_bow.l2_normalize = true\n"
    << "morph.l2_normalize = true\n\n"
    << "[metrics]\n"
    << "ordinal = " << (bias ? "true" : "false") << "\n";
  if (bias) o << "ranks = 0,1,2\n";
  o << "\n[classifiers]\n"
    << "list = majority,knn,logreg,linsvm,mlp,dtree,rforest,gboost\n"
    << "knn.k = 5\n"
    << "mlp.hidden = 100\n"
    << "mlp.epochs = 200\n"
    << "mlp.learning_rate = 0.01\n"
    << "rforest.n_trees = 100\n"
    << "gboost.n_stages = 100\n\n"
    << "[output]\n"
    << "dir = out\n";
  return o.str();
}

}  // namespace

void write_synthetic_corpus(const SyntheticCorpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const bool bias = c.task == SynthTask::kBias;
  std::map<std::string_view, const SynthDoc*> by_id;
  for (const auto& d : c.docs) by_id[d.id] = &d;
  auto tsv = [&](const std::vector<std::string>& ids) {
    std::string out = bias ? "id\theadline\ttext\tlabel\n" : "id\ttext\tlabel\n";
    for (const auto& id : ids) {
      const SynthDoc& d = *by_id.at(id);
      out += tsv_escape(d.id) + '\t';
      if (bias) out += tsv_escape(d.headline) + '\t';
      out += tsv_escape(d.body) + '\t' + tsv_escape(d.label) + '\n';
    }
    return out;
  };
  write_file(dir / "train.tsv", tsv(c.train_ids));
  write_file(dir / "test.tsv", tsv(c.test_ids));

  std::vector<AnnotatedSentence> all;
  for (const auto& d : c.docs) all.insert(all.end(), d.sentences.begin(), d.sentences.end());
  std::ostringstream conllu;
  write_conllu(all, conllu);
  write_file(dir / "annotations.conllu", conllu.str());

  std::ostringstream emb;
  write_embeddings(c.embeddings, emb);
  write_file(dir / "embeddings.txt", emb.str());
  write_file(dir / "experiment.ini", experiment_ini(c));
}

}  // namespace stylo
