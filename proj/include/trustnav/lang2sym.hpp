#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustnav/config.hpp"

namespace trustnav::lang {

// Directional language symbols. Numeric codes are the observation encoding.
enum class Symbol : int { U = 1, D = 2, L = 3, R = 4 };

char symbol_char(Symbol s);
Symbol symbol_from_char(char c);  // throws std::invalid_argument
std::string symbols_string(std::span<const Symbol> symbols);

enum class AffectKind { Repair, Hesitation, Uncertainty };

// Token span [begin, end) over the tokenized utterance.
struct AffectSpan {
  AffectKind kind;
  std::size_t begin;
  std::size_t end;
};

struct ScoredGuidance {
  std::vector<Symbol> symbols;
  std::vector<double> confidences;  // one per symbol, in (0,1]
  double tau_h = 0.0;               // mean confidence; 0 when no symbols
};

struct CorpusEntry {
  std::string text;
  std::vector<Symbol> expected;
  std::string notes;
};

// Symbolizer knobs; defaults match EnvConfig.
struct SymbolizerOptions {
  int l_max = 5;
  int corridor_run = 2;
};

// Lowercases, strips punctuation except intra-word hyphens, collapses
// whitespace. Empty input yields an empty vector.
std::vector<std::string> tokenize(std::string_view text);

std::vector<AffectSpan> detect_affect_spans(std::span<const std::string> tokens,
                                            const AffectConfig& affect);

struct RepairOutcome {
  std::vector<std::string> tokens;   // tokens surviving repair
  std::vector<std::size_t> source;   // original index of each surviving token
  bool ignored_span = false;         // a repair span had nothing to correct
};

// Deletes, for every Repair span, the directional clause preceding the cue
// (and the cue itself), keeping the correction.
RepairOutcome apply_repairs(std::span<const std::string> tokens,
                            std::span<const AffectSpan> spans);

std::vector<Symbol> symbolize(std::span<const std::string> tokens,
                              const SymbolizerOptions& opt = {});

// Applies affect factors clause-by-clause and averages into tau_h.
// `tokens`/`spans` are the *original* (pre-repair) utterance; `symbols` must
// be the symbolize output of the repaired tokens.
ScoredGuidance score_guidance(std::span<const Symbol> symbols,
                              std::span<const std::string> tokens,
                              std::span<const AffectSpan> spans,
                              const AffectConfig& affect,
                              const SymbolizerOptions& opt = {});

struct ParsedUtterance {
  std::vector<std::string> tokens;
  std::vector<AffectSpan> spans;
  RepairOutcome repaired;
  ScoredGuidance guidance;
};

// Full pipeline: tokenize -> spans -> repairs -> symbolize -> score.
ParsedUtterance parse_utterance(std::string_view text, const AffectConfig& affect,
                                const SymbolizerOptions& opt = {});
ScoredGuidance parse_guidance(std::string_view text, const AffectConfig& affect,
                              const SymbolizerOptions& opt = {});

// Corpus records are JSON objects, one per line:
//   {"text": "...", "symbols": ["U","U","L"], "notes": "optional"}
// Malformed lines and empty corpora raise std::runtime_error.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);

struct CorpusDiff {
  std::size_t index;
  std::string text;
  std::string expected;
  std::string actual;
};

// Exact-match accuracy of the full parse pipeline over the corpus.
double evaluate_corpus(std::span<const CorpusEntry> entries,
                       const AffectConfig& affect, const SymbolizerOptions& opt,
                       std::vector<CorpusDiff>* diffs = nullptr);

}  // namespace trustnav::lang
