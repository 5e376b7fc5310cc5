#include "trustnav/lang2sym.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace trustnav::lang {

using Tokens = std::span<const std::string>;

namespace {

bool is_straight_word(const std::string& t) {
  return t == "straight" || t == "forward" || t == "ahead";
}
bool is_reverse_word(const std::string& t) {
  return t == "back" || t == "around";
}
bool is_turn_word(const std::string& t) { return t == "left" || t == "right"; }
bool is_directional_word(const std::string& t) {
  return is_straight_word(t) || is_reverse_word(t) || is_turn_word(t);
}
bool is_separator(const std::string& t) { return t == "and" || t == "then"; }
bool is_article(const std::string& t) {
  return t == "the" || t == "a" || t == "an";
}

int ordinal_value(const std::string& t) {
  if (t == "first" || t == "next") return 1;
  if (t == "second") return 2;
  if (t == "third") return 3;
  if (t == "fourth") return 4;
  if (t == "fifth") return 5;
  return 0;
}

bool is_corridor_noun(const std::string& t) {
  return t == "corridor" || t == "hall" || t == "hallway";
}

// Matches "end of [the] corridor|hall|hallway" at position i; returns the
// number of tokens consumed, 0 if no match.
std::size_t corridor_match(Tokens tokens, std::size_t i) {
  if (i + 2 >= tokens.size()) return 0;
  if (tokens[i] != "end" || tokens[i + 1] != "of") return 0;
  if (is_corridor_noun(tokens[i + 2])) return 3;
  if (i + 3 < tokens.size() && tokens[i + 2] == "the" &&
      is_corridor_noun(tokens[i + 3]))
    return 4;
  return 0;
}

// Locative pattern: (on|to) (your|the) left|right.
bool is_locative_turn(Tokens tokens, std::size_t i) {
  if (!is_turn_word(tokens[i]) || i < 2) return false;
  const std::string& det = tokens[i - 1];
  const std::string& prep = tokens[i - 2];
  return (det == "your" || det == "the") && (prep == "on" || prep == "to");
}

// Clause index per token; separators get -1 and close the running clause.
std::vector<int> clause_ids(Tokens tokens) {
  std::vector<int> ids(tokens.size(), -1);
  int cur = 0;
  bool open = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_separator(tokens[i])) {
      if (open) ++cur;
      open = false;
      continue;
    }
    ids[i] = cur;
    open = true;
  }
  return ids;
}

struct SymbolizeDetail {
  std::vector<Symbol> symbols;
  std::vector<std::size_t> source;  // token index each symbol derives from
};

// Directional content items extracted before emission.
struct Item {
  enum class Kind { Straight, Corridor, Turn } kind;
  Symbol sym = Symbol::U;
  int run = 0;       // leading U count (ordinal expansion / corridor run)
  bool locative = false;
  std::size_t src = 0;
  std::size_t last_token = 0;  // for adjacent-word merging
};

SymbolizeDetail symbolize_detailed(Tokens tokens, const SymbolizerOptions& opt) {
  std::vector<Item> items;
  for (std::size_t i = 0; i < tokens.size();) {
    if (std::size_t n = corridor_match(tokens, i); n > 0) {
      items.push_back({Item::Kind::Corridor, Symbol::U, opt.corridor_run,
                       false, i, i + n - 1});
      i += n;
      continue;
    }
    const std::string& t = tokens[i];
    if (is_straight_word(t)) {
      // "straight ahead" is one instruction, not two
      if (!items.empty() && items.back().kind == Item::Kind::Straight &&
          items.back().last_token + 1 == i) {
        items.back().last_token = i;
      } else {
        items.push_back({Item::Kind::Straight, Symbol::U, 0, false, i, i});
      }
      ++i;
      continue;
    }
    if (is_reverse_word(t)) {
      if (!items.empty() && items.back().kind == Item::Kind::Turn &&
          items.back().sym == Symbol::D && items.back().last_token + 1 == i) {
        items.back().last_token = i;
      } else {
        items.push_back({Item::Kind::Turn, Symbol::D, 0, false, i, i});
      }
      ++i;
      continue;
    }
    if (is_turn_word(t)) {
      Item item{Item::Kind::Turn, t == "left" ? Symbol::L : Symbol::R, 0,
                is_locative_turn(tokens, i), i, i};
      if (!item.locative) {
        // ordinal lookback, skipping articles: "take the second left"
        for (std::size_t j = i; j > 0;) {
          --j;
          if (is_article(tokens[j])) continue;
          if (int n = ordinal_value(tokens[j]); n >= 2) item.run = n;
          break;
        }
      }
      items.push_back(item);
      ++i;
      continue;
    }
    ++i;
  }

  SymbolizeDetail out;
  auto emit = [&out](Symbol s, std::size_t src) {
    out.symbols.push_back(s);
    out.source.push_back(src);
  };
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Item& item = items[k];
    switch (item.kind) {
      case Item::Kind::Straight: {
        // A straight word followed by a U-run phrase describes the same
        // motion ("go straight and take the second left" -> U,U,L).
        bool absorbed = k + 1 < items.size() && items[k + 1].run >= 2;
        if (!absorbed) emit(Symbol::U, item.src);
        break;
      }
      case Item::Kind::Corridor:
        for (int r = 0; r < item.run; ++r) emit(Symbol::U, item.src);
        break;
      case Item::Kind::Turn:
        if (item.locative) {
          // Trailing locatives name the final turn; mid-utterance ones are
          // landmark descriptions. A duplicate of the turn just taken
          // ("take a right ... on your right") adds nothing.
          if (k + 1 == items.size() &&
              (out.symbols.empty() || out.symbols.back() != item.sym))
            emit(item.sym, item.src);
          break;
        }
        for (int r = 0; r < item.run; ++r) emit(Symbol::U, item.src);
        emit(item.sym, item.src);
        break;
    }
  }
  if (out.symbols.size() > static_cast<std::size_t>(opt.l_max)) {
    out.symbols.resize(opt.l_max);
    out.source.resize(opt.l_max);
  }
  return out;
}

struct LexiconMatcher {
  std::vector<std::vector<std::string>> entries;  // token sequences

  explicit LexiconMatcher(const std::vector<std::string>& lexicon) {
    for (const auto& entry : lexicon) {
      std::vector<std::string> words;
      std::istringstream in(entry);
      std::string w;
      while (in >> w) words.push_back(w);
      if (!words.empty()) entries.push_back(std::move(words));
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }

  // Longest entry matching at position i; 0 if none.
  std::size_t match(Tokens tokens, std::size_t i) const {
    for (const auto& e : entries) {
      if (i + e.size() > tokens.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < e.size(); ++k)
        if (tokens[i + k] != e[k]) {
          ok = false;
          break;
        }
      if (ok) return e.size();
    }
    return 0;
  }
};

void scan_kind(Tokens tokens, const LexiconMatcher& m, AffectKind kind,
               std::vector<AffectSpan>& out) {
  for (std::size_t i = 0; i < tokens.size();) {
    std::size_t n = m.match(tokens, i);
    if (n > 0) {
      out.push_back({kind, i, i + n});
      i += n;
    } else {
      ++i;
    }
  }
}

}  // namespace

char symbol_char(Symbol s) {
  switch (s) {
    case Symbol::U: return 'U';
    case Symbol::D: return 'D';
    case Symbol::L: return 'L';
    case Symbol::R: return 'R';
  }
  return '?';
}

Symbol symbol_from_char(char c) {
  switch (c) {
    case 'U': return Symbol::U;
    case 'D': return Symbol::D;
    case 'L': return Symbol::L;
    case 'R': return Symbol::R;
  }
  throw std::invalid_argument(std::string("not a directional symbol: ") + c);
}

std::string symbols_string(std::span<const Symbol> symbols) {
  std::string s;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) s += ',';
    s += symbol_char(symbols[i]);
  }
  return s;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    // strip hyphens that ended up at word edges ("well-")
    while (!cur.empty() && cur.front() == '-') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == '-') cur.pop_back();
    if (!cur.empty()) tokens.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (ch == '-' || ch == '\'') {
      if (ch == '-') cur += '-';
      // apostrophes vanish: "don't" -> "dont"
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<AffectSpan> detect_affect_spans(Tokens tokens,
                                            const AffectConfig& affect) {
  std::vector<AffectSpan> spans;
  scan_kind(tokens, LexiconMatcher(affect.fillers), AffectKind::Hesitation,
            spans);
  scan_kind(tokens, LexiconMatcher(affect.hedges), AffectKind::Uncertainty,
            spans);

  std::vector<AffectSpan> cues;
  scan_kind(tokens, LexiconMatcher(affect.repair_cues), AffectKind::Repair,
            cues);
  // adjacent cue matches form one repair ("no no", "no wait")
  std::vector<AffectSpan> merged;
  for (const auto& c : cues) {
    if (!merged.empty() && merged.back().end == c.begin)
      merged.back().end = c.end;
    else
      merged.push_back(c);
  }
  // a repair must sit between directional content on both sides
  for (const auto& c : merged) {
    bool before = false, after = false;
    for (std::size_t j = 0; j < c.begin; ++j)
      if (is_directional_word(tokens[j])) before = true;
    for (std::size_t j = c.end; j < tokens.size(); ++j)
      if (is_directional_word(tokens[j])) after = true;
    if (before && after) spans.push_back(c);
  }

  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return a.begin != b.begin ? a.begin < b.begin
                              : static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return spans;
}

RepairOutcome apply_repairs(Tokens tokens, std::span<const AffectSpan> spans) {
  RepairOutcome out;
  std::vector<bool> keep(tokens.size(), true);
  const std::vector<int> clause = clause_ids(tokens);

  for (const auto& span : spans) {
    if (span.kind != AffectKind::Repair) continue;
    // last surviving directional token before the cue
    std::size_t d = tokens.size();
    for (std::size_t j = span.begin; j > 0;) {
      --j;
      if (keep[j] && is_directional_word(tokens[j])) {
        d = j;
        break;
      }
    }
    if (d == tokens.size()) {
      out.ignored_span = true;
      continue;
    }
    // delete from the start of that clause through the cue
    std::size_t cstart = d;
    while (cstart > 0 && clause[cstart - 1] == clause[d]) --cstart;
    for (std::size_t j = cstart; j < span.end && j < tokens.size(); ++j)
      keep[j] = false;
  }

  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (keep[j]) {
      out.tokens.push_back(tokens[j]);
      out.source.push_back(j);
    }
  }
  return out;
}

std::vector<Symbol> symbolize(Tokens tokens, const SymbolizerOptions& opt) {
  return symbolize_detailed(tokens, opt).symbols;
}

ScoredGuidance score_guidance(std::span<const Symbol> symbols, Tokens tokens,
                              std::span<const AffectSpan> spans,
                              const AffectConfig& affect,
                              const SymbolizerOptions& opt) {
  ScoredGuidance g;
  g.symbols.assign(symbols.begin(), symbols.end());
  if (symbols.empty()) {
    g.tau_h = 0.0;
    return g;
  }

  RepairOutcome rep = apply_repairs(tokens, spans);
  SymbolizeDetail det = symbolize_detailed(rep.tokens, opt);
  if (det.symbols.size() != symbols.size() ||
      !std::equal(symbols.begin(), symbols.end(), det.symbols.begin()))
    throw std::invalid_argument(
        "score_guidance: symbols are not the symbolization of the repaired "
        "tokens");

  // map every symbol back to its original token
  std::vector<std::size_t> src(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i)
    src[i] = rep.source[det.source[i]];

  const std::vector<int> clause = clause_ids(tokens);
  g.confidences.assign(symbols.size(), 1.0);

  for (const auto& span : spans) {
    double factor = 1.0;
    switch (span.kind) {
      case AffectKind::Repair: factor = affect.a_rep; break;
      case AffectKind::Hesitation: factor = affect.a_hes; break;
      case AffectKind::Uncertainty: factor = affect.a_unc; break;
    }
    if (span.kind == AffectKind::Hesitation) {
      // hesitation casts doubt forward, onto the clause that follows it
      std::size_t j = span.end;
      while (j < tokens.size() && clause[j] < 0) ++j;
      if (j == tokens.size()) continue;
      for (std::size_t i = 0; i < symbols.size(); ++i)
        if (src[i] >= span.end && clause[src[i]] == clause[j])
          g.confidences[i] *= factor;
    } else {
      // repair / uncertainty discount their containing clause
      std::size_t b = span.begin;
      while (b < tokens.size() && clause[b] < 0) ++b;
      if (b == tokens.size()) continue;
      for (std::size_t i = 0; i < symbols.size(); ++i)
        if (clause[src[i]] == clause[b]) g.confidences[i] *= factor;
    }
  }

  g.tau_h = std::accumulate(g.confidences.begin(), g.confidences.end(), 0.0) /
            static_cast<double>(g.confidences.size());
  return g;
}

ParsedUtterance parse_utterance(std::string_view text,
                                const AffectConfig& affect,
                                const SymbolizerOptions& opt) {
  ParsedUtterance p;
  p.tokens = tokenize(text);
  p.spans = detect_affect_spans(p.tokens, affect);
  p.repaired = apply_repairs(p.tokens, p.spans);
  std::vector<Symbol> symbols = symbolize(p.repaired.tokens, opt);
  p.guidance = score_guidance(symbols, p.tokens, p.spans, affect, opt);
  return p;
}

ScoredGuidance parse_guidance(std::string_view text, const AffectConfig& affect,
                              const SymbolizerOptions& opt) {
  return parse_utterance(text, affect, opt).guidance;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open corpus file: " + path.string());
  std::vector<CorpusEntry> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(trimmed, nullptr, false);
    const std::string where =
        path.filename().string() + ":" + std::to_string(lineno);
    if (j.is_discarded())
      throw std::runtime_error(where + ": malformed JSON record");
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string() ||
        !j.contains("symbols") || !j["symbols"].is_array())
      throw std::runtime_error(where +
                               ": record needs string 'text' and array "
                               "'symbols'");
    CorpusEntry e;
    e.text = j["text"].get<std::string>();
    for (const auto& s : j["symbols"]) {
      if (!s.is_string() || s.get<std::string>().size() != 1)
        throw std::runtime_error(where + ": symbols must be single characters");
      try {
        e.expected.push_back(symbol_from_char(s.get<std::string>()[0]));
      } catch (const std::invalid_argument& ex) {
        throw std::runtime_error(where + ": " + ex.what());
      }
    }
    if (e.expected.empty())
      throw std::runtime_error(where + ": expected symbols must be non-empty");
    if (j.contains("notes")) e.notes = j["notes"].get<std::string>();
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw std::runtime_error("empty corpus");
  return entries;
}

double evaluate_corpus(std::span<const CorpusEntry> entries,
                       const AffectConfig& affect, const SymbolizerOptions& opt,
                       std::vector<CorpusDiff>* diffs) {
  if (entries.empty()) throw std::runtime_error("empty corpus");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    ScoredGuidance g = parse_guidance(e.text, affect, opt);
    if (g.symbols == e.expected) {
      ++hits;
    } else if (diffs) {
      diffs->push_back({i, e.text, symbols_string(e.expected),
                        symbols_string(g.symbols)});
    }
  }
  return static_cast<double>(hits) / static_cast<double>(entries.size());
}

}  // namespace trustnav::lang
