#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "trustnav/world.hpp"

using namespace trustnav;
using namespace trustnav::sim;
using lang::Symbol;

namespace {

// exhaustive simple-path enumeration; the shortest length found is the
// independent answer for the BFS under test
int brute_force_shortest(const WorldMap& w, int from, int to) {
  int best = -1;
  std::vector<int> path{from};
  std::set<int> seen{from};
  auto dfs = [&](auto&& self, int node) -> void {
    if (node == to) {
      int len = static_cast<int>(path.size()) - 1;
      if (best < 0 || len < best) best = len;
      return;
    }
    for (const auto& [nb, dir] : w.adjacency[node]) {
      (void)dir;
      if (seen.count(nb)) continue;
      seen.insert(nb);
      path.push_back(nb);
      self(self, nb);
      path.pop_back();
      seen.erase(nb);
    }
  };
  dfs(dfs, from);
  return best;
}

}  // namespace

TEST_CASE("grid combinatorics") {
  WorldMap w3 = generate_world(3, 3, 5.0, 7);
  CHECK(w3.gateways.size() == 9);
  CHECK(w3.edge_count() == 12);

  WorldMap w2 = generate_world(2, 2, 5.0, 7);
  CHECK(w2.gateways.size() == 4);
  CHECK(w2.edge_count() == 4);

  CHECK_THROWS_AS(generate_world(1, 3, 5.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_world(3, 1, 5.0, 0), std::invalid_argument);
}

TEST_CASE("generation is deterministic per seed") {
  WorldMap a = generate_world(4, 5, 3.0, 42);
  WorldMap b = generate_world(4, 5, 3.0, 42);
  CHECK(a.spawn == b.spawn);
  CHECK(a.goal == b.goal);
  CHECK(a.spawn_heading == b.spawn_heading);
  CHECK(dump_world(a) == dump_world(b));
  CHECK(a.goal != a.spawn);
}

TEST_CASE("edge labels agree with node geometry") {
  WorldMap w = generate_world(3, 4, 5.0, 3);
  for (std::size_t a = 0; a < w.adjacency.size(); ++a) {
    for (const auto& [b, dir] : w.adjacency[a]) {
      const auto& ga = w.gateways[a];
      const auto& gb = w.gateways[b];
      double dx = 0, dy = 0;
      heading_delta(dir, dx, dy);
      CHECK(gb.x - ga.x == doctest::Approx(dx * w.cell_size));
      CHECK(gb.y - ga.y == doctest::Approx(dy * w.cell_size));
    }
  }
}

TEST_CASE("rotations") {
  CHECK(rotate(Heading::N, Symbol::L) == Heading::W);
  CHECK(rotate(Heading::N, Symbol::U) == Heading::N);
  CHECK(rotate(Heading::E, Symbol::D) == Heading::W);
  CHECK(rotate(Heading::S, Symbol::R) == Heading::W);
  for (int h = 0; h < 4; ++h)
    for (Symbol s : {Symbol::U, Symbol::D, Symbol::L, Symbol::R}) {
      Heading from = static_cast<Heading>(h);
      CHECK(relative_symbol(from, rotate(from, s)) == s);
    }
}

TEST_CASE("apply_reactive honors the corridor graph") {
  WorldMap w = generate_world(3, 3, 5.0, 7);
  RobotState r;
  // center node: every direction available
  const Gateway& center = w.gateways[w.node_id(1, 1)];
  r.x = center.x;
  r.y = center.y;
  r.heading = Heading::N;
  bool no_edge = true;
  RobotState out = apply_reactive(w, r, Symbol::L, &no_edge);
  CHECK(out.heading == Heading::W);
  CHECK_FALSE(no_edge);
  CHECK(out.x == r.x);
  CHECK(out.y == r.y);

  // corner node heading out of the grid: command is a flagged no-op
  const Gateway& corner = w.gateways[w.node_id(0, 0)];
  r.x = corner.x;
  r.y = corner.y;
  r.heading = Heading::N;  // west of (0,0) is a wall
  out = apply_reactive(w, r, Symbol::L, &no_edge);
  CHECK(no_edge);
  CHECK(out.heading == Heading::N);

  // not at a gateway
  r.x = corner.x + 2.0;
  CHECK_THROWS_AS(apply_reactive(w, r, Symbol::U, nullptr), std::logic_error);
}

TEST_CASE("shortest gateway counts match brute force") {
  WorldMap w = generate_world(3, 3, 5.0, 7);
  CHECK(shortest_gateway_count(w, 4, 4) == 0);
  CHECK(shortest_gateway_count(w, 0, 1) == 1);
  CHECK(shortest_gateway_count(w, 0, 8) == 4);  // opposite corners
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b)
      CHECK(shortest_gateway_count(w, a, b) == brute_force_shortest(w, a, b));
  CHECK_THROWS_AS(shortest_gateway_count(w, 0, 99), std::invalid_argument);
}

TEST_CASE("advance reaches a 4 m gateway in exactly 4 s") {
  WorldMap w = generate_world(2, 2, 4.0, 1);
  RobotState r;
  r.x = w.gateways[0].x;
  r.y = w.gateways[0].y;
  r.heading = Heading::E;
  std::vector<char> pass;
  DetectionParams p;
  Event e = advance_until_event(w, r, {}, pass, p);
  CHECK(e.kind == (w.goal == 1 ? Event::Kind::TargetReached
                               : Event::Kind::GatewayReached));
  CHECK(e.id == 1);
  CHECK(r.elapsed == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.x == doctest::Approx(4.0));
  CHECK(r.y == doctest::Approx(0.0));
}

TEST_CASE("a human standing in range triggers at zero cost") {
  WorldMap w = generate_world(2, 2, 5.0, 1);
  RobotState r{w.gateways[0].x, w.gateways[0].y, Heading::E, 0.0};
  MovingBody body;
  body.horizontal = true;
  body.fixed = 0.0;
  body.lo = 0.0;
  body.hi = 5.0;
  body.start = 1.0;  // 1 m ahead
  body.speed = 0.0;
  std::vector<MovingBody> bodies{body};
  std::vector<char> pass;
  DetectionParams p;
  Event e = advance_until_event(w, r, bodies, pass, p);
  CHECK(e.kind == Event::Kind::HumanDetected);
  CHECK(e.id == 0);
  CHECK(r.elapsed == doctest::Approx(0.0));

  // suppressed while inside the radius, detectable again after leaving
  Event e2 = advance_until_event(w, r, bodies, pass, p);
  CHECK(e2.kind != Event::Kind::HumanDetected);
}

TEST_CASE("humans win ties against gateways in the same tick") {
  WorldMap w = generate_world(2, 2, 5.0, 1);
  RobotState r{0.0, 0.0, Heading::E, 0.0};
  MovingBody body;  // parked exactly on the gateway ahead
  body.horizontal = true;
  body.fixed = 0.0;
  body.lo = 0.0;
  body.hi = 5.0;
  body.start = 5.0;
  body.speed = 0.0;
  std::vector<MovingBody> bodies{body};
  std::vector<char> pass;
  DetectionParams p;
  Event e = advance_until_event(w, r, bodies, pass, p);
  CHECK(e.kind == Event::Kind::HumanDetected);
}

TEST_CASE("dead end is reported as the node itself") {
  WorldMap w = generate_world(2, 2, 5.0, 1);
  RobotState r{0.0, 0.0, Heading::W, 0.0};  // wall behind (0,0)
  std::vector<char> pass;
  DetectionParams p;
  Event e = advance_until_event(w, r, {}, pass, p);
  CHECK(e.kind == Event::Kind::GatewayReached);
  CHECK(e.id == 0);
  CHECK(r.elapsed == doctest::Approx(0.0));
}

TEST_CASE("elapsed time is monotone across events") {
  WorldMap w = generate_world(3, 3, 5.0, 7);
  RobotState r{w.gateways[w.spawn].x, w.gateways[w.spawn].y, w.spawn_heading,
               0.0};
  std::vector<char> pass;
  DetectionParams p;
  double last = 0.0;
  for (int i = 0; i < 6; ++i) {
    Event e = advance_until_event(w, r, {}, pass, p);
    CHECK(r.elapsed >= last);
    last = r.elapsed;
    if (e.kind == Event::Kind::TargetReached) break;
    // bounce off walls with a fixed turn rule
    bool no_edge = false;
    r = apply_reactive(w, r, Symbol::R, &no_edge);
    if (no_edge) r = apply_reactive(w, r, Symbol::D, &no_edge);
  }
}

TEST_CASE("ping-pong walkers stay on their corridor and reverse at ends") {
  MovingBody b;
  b.horizontal = false;
  b.fixed = 5.0;
  b.lo = 0.0;
  b.hi = 10.0;
  b.start = 9.0;
  b.dir0 = 1;
  b.speed = 1.0;
  double x = 0, y = 0;
  b.position_at(0.0, x, y);
  CHECK(x == doctest::Approx(5.0));
  CHECK(y == doctest::Approx(9.0));
  b.position_at(1.0, x, y);  // hits the end
  CHECK(y == doctest::Approx(10.0));
  b.position_at(3.0, x, y);  // bounced back
  CHECK(y == doctest::Approx(8.0));
  b.position_at(13.0, x, y);  // bounced at 0 too
  CHECK(y == doctest::Approx(2.0));
  for (double t = 0; t < 40.0; t += 0.37) {
    b.position_at(t, x, y);
    CHECK(y >= 0.0);
    CHECK(y <= 10.0);
    CHECK(x == doctest::Approx(5.0));
  }
}

TEST_CASE("event traces are deterministic") {
  WorldMap w = generate_world(3, 3, 5.0, 9);
  auto run = [&] {
    RobotState r{w.gateways[w.spawn].x, w.gateways[w.spawn].y, w.spawn_heading,
                 0.0};
    MovingBody body;
    body.horizontal = true;
    body.fixed = 5.0;
    body.lo = 0.0;
    body.hi = 10.0;
    body.start = 2.0;
    body.speed = 1.1;
    std::vector<MovingBody> bodies{body};
    std::vector<char> pass;
    DetectionParams p;
    std::vector<std::pair<int, double>> trace;
    for (int i = 0; i < 5; ++i) {
      Event e = advance_until_event(w, r, bodies, pass, p);
      trace.emplace_back(static_cast<int>(e.kind) * 100 + e.id, r.elapsed);
      if (e.kind == Event::Kind::TargetReached) break;
      if (e.kind == Event::Kind::GatewayReached) {
        bool no_edge = false;
        r = apply_reactive(w, r, Symbol::R, &no_edge);
        if (no_edge) r = apply_reactive(w, r, Symbol::D, &no_edge);
      }
    }
    return trace;
  };
  CHECK(run() == run());
}
