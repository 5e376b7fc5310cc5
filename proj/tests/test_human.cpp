#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "trustnav/human.hpp"
#include "trustnav/rng.hpp"

using namespace trustnav;
using namespace trustnav::sim;
using lang::Symbol;

namespace {

// walks the guidance symbols over the gateway graph, starting at the gateway
// nearest the human with the heading used at generation time
int execute_guidance(const WorldMap& w, const SimHuman& h, Heading heading) {
  int node = w.nearest_gateway(h.x, h.y);
  for (Symbol s : h.guidance.symbols) {
    heading = rotate(heading, s);
    auto nb = w.neighbor(node, heading);
    REQUIRE(nb.has_value());  // guidance must stay on the graph
    node = *nb;
  }
  return node;
}

}  // namespace

TEST_CASE("gaussian trust values") {
  TrustField f{3.0, 4.0, 2.0};
  CHECK(gaussian_trust(3.0, 4.0, f) == doctest::Approx(1.0));
  CHECK(gaussian_trust(3.0 + f.sigma, 4.0, f) ==
        doctest::Approx(std::exp(-0.5)));
  CHECK(gaussian_trust(3.0, 4.0 + 3 * f.sigma, f) ==
        doctest::Approx(std::exp(-4.5)));
  CHECK_THROWS_AS(gaussian_trust(0, 0, TrustField{0, 0, 0}),
                  std::invalid_argument);
}

TEST_CASE("trust decays with distance along a ray") {
  TrustField f{0.0, 0.0, 3.0};
  double last = 2.0;
  for (double d = 0.0; d <= 12.0; d += 0.5) {
    double g = gaussian_trust(d, 0.0, f);
    CHECK(g < last);
    CHECK(g > 0.0);
    last = g;
  }
}

TEST_CASE("goal perturbation boundaries and distribution") {
  WorldMap w = generate_world(3, 3, 5.0, 7);
  std::mt19937_64 rng(123);

  for (int i = 0; i < 200; ++i)
    CHECK(perturb_goal(w.adjacency, 4, 1.0, rng) == 4);

  // node 1 sits on an edge: neighbors {0, 2, 4}
  const int goal = 1;
  REQUIRE(w.adjacency[goal].size() == 3);
  std::map<int, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[perturb_goal(w.adjacency, goal, 0.5, rng)];
  CHECK(static_cast<double>(counts[goal]) / n == doctest::Approx(0.5).epsilon(0.02));
  for (const auto& [nb, dir] : w.adjacency[goal]) {
    (void)dir;
    CHECK(static_cast<double>(counts[nb]) / n ==
          doctest::Approx(1.0 / 6.0).epsilon(0.06));
  }

  // near-zero trust: the true goal essentially never survives
  int hits = 0;
  for (int i = 0; i < 10000; ++i)
    if (perturb_goal(w.adjacency, goal, 1e-12, rng) == goal) ++hits;
  CHECK(hits == 0);
}

TEST_CASE("one-hop guidance is a single U when already at the believed goal") {
  WorldMap w = generate_world(2, 3, 5.0, 5);
  TrustField f = trust_field_for(EnvConfig{}, w);
  MentalMap map{w.adjacency, w.goal};
  const Gateway& g = w.gateways[w.goal];
  std::mt19937_64 rng(1);
  auto guidance = generate_guidance(g.x + 0.3, g.y, Heading::N, map, w, f, 5,
                                    rng);
  REQUIRE(guidance.symbols.size() == 1);
  CHECK(guidance.symbols[0] == Symbol::U);
  CHECK(guidance.tau_h == doctest::Approx(gaussian_trust(g.x + 0.3, g.y, f)));
}

TEST_CASE("a perturbed believed goal bends the guidance away from the truth") {
  // human at the south-west corner, true goal two hops east, believed goal
  // one node north of it: [R, U]-shaped guidance instead of [R, R, U]
  WorldMap w = generate_world(3, 3, 5.0, 7);
  w.goal = w.node_id(0, 2);
  TrustField f{w.gateways[w.goal].x, w.gateways[w.goal].y, 5.0};
  MentalMap map{w.adjacency, w.node_id(1, 2)};  // neighbor of the true goal

  std::mt19937_64 rng(3);
  const Gateway& start = w.gateways[w.node_id(2, 0)];
  for (int trial = 0; trial < 20; ++trial) {
    auto g = generate_guidance(start.x + 0.1, start.y, Heading::S, map, w, f,
                               5, rng);
    SimHuman h;
    h.x = start.x + 0.1;
    h.y = start.y;
    h.guidance = g;
    CHECK(execute_guidance(w, h, Heading::S) == map.believed_goal);
    CHECK(g.symbols.size() == 3);  // 3 hops to the believed goal, not 4
  }
}

TEST_CASE("sampled guidance always walks to the believed goal") {
  WorldMap w = generate_world(3, 3, 5.0, 11);
  EnvConfig env;
  TrustField f = trust_field_for(env, w);
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int batch = 0; batch < 300; ++batch) {
    auto humans = sample_population(w, 4, f, 2, 6, env.l_max, rng);
    for (const auto& h : humans) {
      const int believed = h.mental_map.believed_goal;
      bool valid = believed == w.goal;
      for (const auto& [nb, dir] : w.adjacency[w.goal]) {
        (void)dir;
        if (believed == nb) valid = true;
      }
      CHECK(valid);

      if (w.nearest_gateway(h.x, h.y) == believed) continue;  // "right here"
      CHECK(execute_guidance(w, h, w.spawn_heading) == believed);
      ++checked;
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("population sampling bounds and determinism") {
  WorldMap w = generate_world(3, 3, 5.0, 11);
  EnvConfig env;
  TrustField f = trust_field_for(env, w);
  std::mt19937_64 rng(5);
  CHECK_THROWS_AS(sample_population(w, 0, f, 2, 6, 5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_population(w, 7, f, 2, 6, 5, rng),
                  std::invalid_argument);

  std::mt19937_64 a(42), b(42);
  auto pa = sample_population(w, 4, f, 2, 6, 5, a);
  auto pb = sample_population(w, 4, f, 2, 6, 5, b);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].x == pb[i].x);
    CHECK(pa[i].y == pb[i].y);
    CHECK(pa[i].body.speed == pb[i].body.speed);
    CHECK(pa[i].trust == pb[i].trust);
    CHECK(pa[i].mental_map.believed_goal == pb[i].mental_map.believed_goal);
    CHECK(pa[i].guidance.symbols == pb[i].guidance.symbols);
  }

  for (const auto& h : pa) {
    CHECK(h.body.speed >= 0.8);
    CHECK(h.body.speed <= 1.2);
    CHECK(!h.guidance.symbols.empty());
    CHECK(h.guidance.symbols.size() <= 5);
    for (double c : h.guidance.confidences) {
      CHECK(c > 0.0);
      CHECK(c <= 1.0);
    }
  }
}

TEST_CASE("an enormous sigma makes everyone perfect") {
  WorldMap w = generate_world(3, 3, 5.0, 11);
  TrustField f{w.gateways[w.goal].x, w.gateways[w.goal].y, 1e9};
  std::mt19937_64 rng(8);
  for (int batch = 0; batch < 50; ++batch) {
    auto humans = sample_population(w, 6, f, 2, 6, 5, rng);
    for (const auto& h : humans) {
      CHECK(h.trust == doctest::Approx(1.0));
      CHECK(h.mental_map.believed_goal == w.goal);
      for (double c : h.guidance.confidences)
        CHECK(c == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("population mean trust matches the quadrature oracle") {
  WorldMap w = generate_world(3, 3, 5.0, 11);
  EnvConfig env;
  TrustField f = trust_field_for(env, w);

  // corridors are sampled uniformly by line, then uniformly along the line:
  // the expectation is the mean of per-line averages
  const int lines = w.rows + w.cols;
  double expected = 0.0;
  const int steps = 20000;
  for (int line = 0; line < lines; ++line) {
    bool horizontal = line < w.rows;
    double fixed = (horizontal ? line : line - w.rows) * w.cell_size;
    double len = horizontal ? w.width() : w.height();
    double acc = 0.0;
    for (int k = 0; k < steps; ++k) {
      double s = (k + 0.5) / steps * len;
      double x = horizontal ? s : fixed;
      double y = horizontal ? fixed : s;
      acc += gaussian_trust(x, y, f);
    }
    expected += acc / steps;
  }
  expected /= lines;

  std::mt19937_64 rng(2024);
  double sum = 0.0;
  int count = 0;
  while (count < 20000) {
    auto humans = sample_population(w, 5, f, 2, 6, env.l_max, rng);
    for (const auto& h : humans) {
      sum += h.trust;
      ++count;
    }
  }
  CHECK(sum / count == doctest::Approx(expected).epsilon(0.04));
  MESSAGE("mean tau_h over the default world: ", sum / count);
}
