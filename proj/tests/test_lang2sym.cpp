#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "trustnav/config.hpp"
#include "trustnav/lang2sym.hpp"

using namespace trustnav;
using namespace trustnav::lang;

namespace {

const AffectConfig kAffect = default_config().affect;
const SymbolizerOptions kOpt{5, 2};

std::vector<Symbol> syms(const std::string& text) {
  return parse_guidance(text, kAffect, kOpt).symbols;
}

std::vector<Symbol> from_chars(const std::string& s) {
  std::vector<Symbol> out;
  for (char c : s) out.push_back(symbol_from_char(c));
  return out;
}

}  // namespace

TEST_CASE("tokenize splits, lowercases and strips punctuation") {
  CHECK(tokenize("Turn left and go straight") ==
        std::vector<std::string>{"turn", "left", "and", "go", "straight"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("umm, no-no... take a right!") ==
        std::vector<std::string>{"umm", "no-no", "take", "a", "right"});
  CHECK(tokenize("  spaced\t\tout  ") ==
        std::vector<std::string>{"spaced", "out"});
}

TEST_CASE("affect spans: fillers, hedges, repair cues") {
  auto tokens = tokenize("Take a right uhh I mean take a left and go straight");
  auto spans = detect_affect_spans(tokens, kAffect);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].kind == AffectKind::Hesitation);
  CHECK(spans[0].begin == 3);
  CHECK(spans[0].end == 4);
  CHECK(spans[1].kind == AffectKind::Repair);
  CHECK(spans[1].begin == 4);
  CHECK(spans[1].end == 6);

  CHECK(detect_affect_spans(tokenize("Go straight and take the second left"),
                            kAffect)
            .empty());

  auto unc = detect_affect_spans(tokenize("probably go left"), kAffect);
  REQUIRE(unc.size() == 1);
  CHECK(unc[0].kind == AffectKind::Uncertainty);
  CHECK(unc[0].begin == 0);
  CHECK(unc[0].end == 1);
}

TEST_CASE("repair cue needs directional content on both sides") {
  auto spans = detect_affect_spans(tokenize("Sorry I mean go left"), kAffect);
  for (const auto& s : spans) CHECK(s.kind != AffectKind::Repair);

  // manually injected bad span is ignored with a warning flag
  auto tokens = tokenize("no take a left");
  std::vector<AffectSpan> bad{{AffectKind::Repair, 0, 1}};
  RepairOutcome out = apply_repairs(tokens, bad);
  CHECK(out.ignored_span);
  CHECK(out.tokens == tokens);
}

TEST_CASE("repairs keep the correction and drop the original clause") {
  CHECK(syms("Take a right uhh I mean take a left and go straight") ==
        from_chars("LU"));
  CHECK(syms("go straight no no take a left") == from_chars("L"));

  auto tokens = tokenize("turn right and go straight");
  auto spans = detect_affect_spans(tokens, kAffect);
  RepairOutcome out = apply_repairs(tokens, spans);
  CHECK(out.tokens == tokens);  // nothing to repair
  CHECK_FALSE(out.ignored_span);
}

TEST_CASE("symbolization rules") {
  SUBCASE("ordinals expand to a straight run") {
    CHECK(syms("Go straight and take the second left") == from_chars("UUL"));
    CHECK(syms("take the second left") == from_chars("UUL"));
    CHECK(syms("go ahead and take the third right") == from_chars("UUUR"));
    CHECK(syms("take the next left") == from_chars("L"));
  }
  SUBCASE("corridor runs") {
    CHECK(syms("Go forward till the end of the corridor and turn left") ==
          from_chars("UUL"));
    CHECK(syms("go to the end of the hallway") == from_chars("UU"));
  }
  SUBCASE("plain sequences") {
    CHECK(syms("Turn left and go straight") == from_chars("LU"));
    CHECK(syms("go back") == from_chars("D"));
    CHECK(syms("turn around and go straight") == from_chars("DU"));
  }
  SUBCASE("trailing locatives") {
    CHECK(syms("Go straight and take a right towards the kitchen on your "
               "right") == from_chars("UR"));
    CHECK(syms("go straight ahead the door is on your left") ==
          from_chars("UL"));
    CHECK(syms("turn left and the office is on the left") == from_chars("L"));
  }
  SUBCASE("no directional content") {
    CHECK(syms("hello there").empty());
    CHECK(syms("").empty());
  }
  SUBCASE("length cap") {
    CHECK(syms("left right left right left right left") ==
          from_chars("LRLRL"));
  }
}

TEST_CASE("scoring: confident straight, doubted turn") {
  auto g = parse_guidance(
      "Go straight at the intersection and take the next left, and umm no-no "
      "take a right",
      kAffect, kOpt);
  REQUIRE(g.symbols == from_chars("UR"));
  CHECK(g.confidences[0] > g.confidences[1]);
  CHECK(g.confidences[0] == doctest::Approx(1.0));
  CHECK(g.confidences[1] == doctest::Approx(0.75 * 0.5));
  CHECK(g.tau_h == doctest::Approx((1.0 + 0.375) / 2));
}

TEST_CASE("scoring: no spans means full confidence") {
  auto g = parse_guidance("Go straight and take the second left", kAffect,
                          kOpt);
  REQUIRE(g.symbols.size() == 3);
  for (double c : g.confidences) CHECK(c == doctest::Approx(1.0));
  CHECK(g.tau_h == doctest::Approx(1.0));
}

TEST_CASE("scoring: hesitation governs the following clause") {
  auto g = parse_guidance("turn left and err go till the end of the corridor",
                          kAffect, kOpt);
  REQUIRE(g.symbols == from_chars("LUU"));
  CHECK(g.confidences[0] == doctest::Approx(1.0));
  CHECK(g.confidences[1] == doctest::Approx(0.5));
  CHECK(g.confidences[2] == doctest::Approx(0.5));
  CHECK(g.tau_h == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("scoring: empty guidance has tau_h zero") {
  auto g = parse_guidance("ummm nothing here", kAffect, kOpt);
  CHECK(g.symbols.empty());
  CHECK(g.tau_h == 0.0);
}

TEST_CASE("determinism: identical text, identical guidance") {
  const std::string text =
      "Go straight and umm take the second left, I think";
  auto a = parse_guidance(text, kAffect, kOpt);
  auto b = parse_guidance(text, kAffect, kOpt);
  CHECK(a.symbols == b.symbols);
  CHECK(a.confidences == b.confidences);
  CHECK(a.tau_h == b.tau_h);
}

TEST_CASE("confidence bounds and tau_h = 1 iff nothing governs") {
  auto entries = load_corpus(std::string(TRUSTNAV_SOURCE_DIR) +
                             "/data/corpus.jsonl");
  for (const auto& e : entries) {
    auto p = parse_utterance(e.text, kAffect, kOpt);
    for (double c : p.guidance.confidences) {
      CHECK(c > 0.0);
      CHECK(c <= 1.0);
    }
    if (!p.guidance.symbols.empty()) {
      CHECK(p.guidance.tau_h > 0.0);
      CHECK(p.guidance.tau_h <= 1.0);
      bool any_discount = false;
      for (double c : p.guidance.confidences)
        if (c < 1.0) any_discount = true;
      CHECK((p.guidance.tau_h == 1.0) == !any_discount);
    }
  }
}

TEST_CASE("monotonicity: extra spans never raise confidence") {
  auto entries = load_corpus(std::string(TRUSTNAV_SOURCE_DIR) +
                             "/data/corpus.jsonl");
  std::mt19937_64 rng(7);
  for (const auto& e : entries) {
    auto tokens = tokenize(e.text);
    if (tokens.empty()) continue;
    auto spans = detect_affect_spans(tokens, kAffect);
    auto repaired = apply_repairs(tokens, spans);
    auto symbols = symbolize(repaired.tokens, kOpt);
    if (symbols.empty()) continue;
    auto base = score_guidance(symbols, tokens, spans, kAffect, kOpt);

    // add a synthetic non-repair span at a random position
    std::vector<AffectSpan> more(spans.begin(), spans.end());
    std::size_t pos =
        std::uniform_int_distribution<std::size_t>(0, tokens.size() - 1)(rng);
    more.push_back({rng() % 2 ? AffectKind::Hesitation
                              : AffectKind::Uncertainty,
                    pos, pos + 1});
    auto scored = score_guidance(symbols, tokens, more, kAffect, kOpt);
    for (std::size_t i = 0; i < symbols.size(); ++i)
      CHECK(scored.confidences[i] <= base.confidences[i] + 1e-12);
  }
}

TEST_CASE("repair soundness over clause pairs") {
  const std::vector<std::pair<std::string, std::string>> clauses = {
      {"take a left", "L"},
      {"take a right", "R"},
      {"go straight", "U"},
      {"turn around", "D"},
      {"take the second left", "UUL"},
      {"take the third right", "UUUR"},
  };
  const std::vector<std::string> cues = {"no", "no-no", "i mean", "wait",
                                         "actually", "no wait"};
  for (const auto& [a, sa] : clauses) {
    for (const auto& [b, sb] : clauses) {
      for (const auto& cue : cues) {
        std::string text = a + " " + cue + " " + b;
        CAPTURE(text);
        CHECK(syms(text) == from_chars(sb));
      }
    }
  }
}

TEST_CASE("corpus loading and evaluation") {
  SUBCASE("table of the four canonical rows scores 1.0") {
    std::string path = "/tmp/trustnav_canonical.jsonl";
    {
      std::ofstream f(path);
      f << R"({"text": "Go straight and take the second left", "symbols": ["U","U","L"]})"
        << "\n"
        << R"({"text": "Go forward till the end of the corridor and turn left", "symbols": ["U","U","L"]})"
        << "\n"
        << R"({"text": "Turn left and go straight", "symbols": ["L","U"]})"
        << "\n"
        << R"({"text": "Go straight and take a right towards the kitchen on your right", "symbols": ["U","R"]})"
        << "\n";
    }
    auto entries = load_corpus(path);
    CHECK(evaluate_corpus(entries, kAffect, kOpt) == doctest::Approx(1.0));
    std::remove(path.c_str());
  }

  SUBCASE("empty corpus is an error") {
    std::string path = "/tmp/trustnav_empty.jsonl";
    { std::ofstream f(path); }
    CHECK_THROWS_WITH_AS(load_corpus(path), "empty corpus",
                         std::runtime_error);
    std::remove(path.c_str());
  }

  SUBCASE("malformed line names its number") {
    std::string path = "/tmp/trustnav_bad.jsonl";
    {
      std::ofstream f(path);
      f << R"({"text": "go left", "symbols": ["L"]})" << "\n";
      f << "not json\n";
    }
    try {
      load_corpus(path);
      FAIL("expected error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::remove(path.c_str());
  }

  SUBCASE("bundled corpus meets the accuracy bar") {
    auto entries = load_corpus(std::string(TRUSTNAV_SOURCE_DIR) +
                               "/data/corpus.jsonl");
    CHECK(entries.size() == 50);
    std::vector<CorpusDiff> diffs;
    double acc = evaluate_corpus(entries, kAffect, kOpt, &diffs);
    for (const auto& d : diffs)
      MESSAGE("miss #", d.index, ": ", d.text, " expected ", d.expected,
              " got ", d.actual);
    CHECK(acc >= 0.95);
  }
}
