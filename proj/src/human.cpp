#include "trustnav/human.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace trustnav::sim {

double gaussian_trust(double x, double y, const TrustField& field) {
  if (field.sigma <= 0)
    throw std::invalid_argument("trust field sigma must be positive");
  double dx = x - field.x_g, dy = y - field.y_g;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * field.sigma * field.sigma));
}

int perturb_goal(const std::vector<std::vector<std::pair<int, Heading>>>& adjacency,
                 int true_goal, double trust, std::mt19937_64& rng) {
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < trust)
    return true_goal;
  const auto& nbrs = adjacency[true_goal];
  if (nbrs.empty()) return true_goal;
  return nbrs[std::uniform_int_distribution<std::size_t>(0, nbrs.size() - 1)(
                  rng)]
      .first;
}

namespace {

// Shortest-path distances to `goal` plus the number of shortest paths from
// each node, on the human's own graph.
struct PathCounts {
  std::vector<int> dist;
  std::vector<double> npaths;
};

PathCounts count_shortest_paths(
    const std::vector<std::vector<std::pair<int, Heading>>>& adj, int goal) {
  PathCounts pc;
  pc.dist.assign(adj.size(), -1);
  pc.npaths.assign(adj.size(), 0.0);
  pc.dist[goal] = 0;
  pc.npaths[goal] = 1.0;
  std::deque<int> queue{goal};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (const auto& [u, dir] : adj[v]) {
      (void)dir;
      if (pc.dist[u] < 0) {
        pc.dist[u] = pc.dist[v] + 1;
        queue.push_back(u);
      }
      if (pc.dist[u] == pc.dist[v] + 1) pc.npaths[u] += pc.npaths[v];
    }
  }
  return pc;
}

}  // namespace

lang::ScoredGuidance generate_guidance(double hx, double hy,
                                       Heading robot_heading,
                                       const MentalMap& map,
                                       const WorldMap& world,
                                       const TrustField& field, int l_max,
                                       std::mt19937_64& rng) {
  lang::ScoredGuidance g;
  const double trust = gaussian_trust(hx, hy, field);
  const int start = world.nearest_gateway(hx, hy);

  if (start == map.believed_goal) {
    g.symbols = {lang::Symbol::U};
    g.confidences = {trust};
    g.tau_h = trust;
    return g;
  }

  PathCounts pc = count_shortest_paths(map.adjacency, map.believed_goal);
  if (pc.dist[start] < 0)
    throw std::runtime_error("believed goal unreachable in mental map");

  // walk downhill, branching proportionally to the shortest-path counts so
  // every shortest path is equally likely
  std::vector<Heading> hops;
  int cur = start;
  while (cur != map.believed_goal) {
    double total = 0.0;
    for (const auto& [u, dir] : map.adjacency[cur]) {
      (void)dir;
      if (pc.dist[u] == pc.dist[cur] - 1) total += pc.npaths[u];
    }
    double draw = std::uniform_real_distribution<double>(0.0, total)(rng);
    int chosen = -1;
    Heading chosen_dir = Heading::N;
    for (const auto& [u, dir] : map.adjacency[cur]) {
      if (pc.dist[u] != pc.dist[cur] - 1) continue;
      chosen = u;
      chosen_dir = dir;
      if (draw < pc.npaths[u]) break;
      draw -= pc.npaths[u];
    }
    hops.push_back(chosen_dir);
    cur = chosen;
  }

  Heading prev = robot_heading;
  for (Heading hop : hops) {
    if (static_cast<int>(g.symbols.size()) >= l_max) break;
    g.symbols.push_back(relative_symbol(prev, hop));
    prev = hop;
  }
  g.confidences.assign(g.symbols.size(), trust);
  g.tau_h = trust;
  return g;
}

std::vector<SimHuman> sample_population(const WorldMap& world, int n,
                                        const TrustField& field, int h_min,
                                        int h_max, int l_max,
                                        std::mt19937_64& rng) {
  if (n < h_min || n > h_max)
    throw std::invalid_argument("population size outside [h_min, h_max]");

  std::vector<SimHuman> humans;
  humans.reserve(n);
  const int lines = world.rows + world.cols;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> walk_speed(0.8, 1.2);

  for (int i = 0; i < n; ++i) {
    SimHuman h;
    h.id = i;
    h.corridor =
        static_cast<int>(std::uniform_int_distribution<int>(0, lines - 1)(rng));

    MovingBody body;
    if (h.corridor < world.rows) {
      body.horizontal = true;
      body.fixed = h.corridor * world.cell_size;
      body.lo = 0.0;
      body.hi = world.width();
    } else {
      body.horizontal = false;
      body.fixed = (h.corridor - world.rows) * world.cell_size;
      body.lo = 0.0;
      body.hi = world.height();
    }
    body.start = body.lo + unit(rng) * (body.hi - body.lo);
    body.speed = walk_speed(rng);
    body.dir0 = unit(rng) < 0.5 ? 1 : -1;
    h.body = body;
    body.position_at(0.0, h.x, h.y);

    h.trust = gaussian_trust(h.x, h.y, field);
    h.mental_map.adjacency = world.adjacency;
    h.mental_map.believed_goal =
        perturb_goal(world.adjacency, world.goal, h.trust, rng);
    h.guidance = generate_guidance(h.x, h.y, world.spawn_heading, h.mental_map,
                                   world, field, l_max, rng);
    humans.push_back(std::move(h));
  }
  return humans;
}

double resolved_sigma(const EnvConfig& env, const WorldMap& world) {
  return env.sigma > 0 ? env.sigma : world.diagonal() / 3.0;
}

TrustField trust_field_for(const EnvConfig& env, const WorldMap& world) {
  const Gateway& g = world.gateways[world.goal];
  return {g.x, g.y, resolved_sigma(env, world)};
}

}  // namespace trustnav::sim
