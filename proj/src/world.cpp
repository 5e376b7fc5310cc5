#include "trustnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "trustnav/rng.hpp"

namespace trustnav::sim {
namespace {

constexpr double kPosEps = 1e-6;

double dist2(double ax, double ay, double bx, double by) {
  double dx = ax - bx, dy = ay - by;
  return dx * dx + dy * dy;
}

std::vector<int> bfs_distances(const WorldMap& w, int from) {
  std::vector<int> dist(w.gateways.size(), -1);
  std::deque<int> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    int node = queue.front();
    queue.pop_front();
    for (const auto& [nb, dir] : w.adjacency[node]) {
      (void)dir;
      if (dist[nb] < 0) {
        dist[nb] = dist[node] + 1;
        queue.push_back(nb);
      }
    }
  }
  return dist;
}

}  // namespace

char heading_char(Heading h) {
  switch (h) {
    case Heading::N: return 'N';
    case Heading::E: return 'E';
    case Heading::S: return 'S';
    case Heading::W: return 'W';
  }
  return '?';
}

Heading heading_from_char(char c) {
  switch (c) {
    case 'N': return Heading::N;
    case 'E': return Heading::E;
    case 'S': return Heading::S;
    case 'W': return Heading::W;
  }
  throw std::invalid_argument(std::string("not a heading: ") + c);
}

void heading_delta(Heading h, double& dx, double& dy) {
  switch (h) {
    case Heading::N: dx = 0; dy = 1; break;
    case Heading::E: dx = 1; dy = 0; break;
    case Heading::S: dx = 0; dy = -1; break;
    case Heading::W: dx = -1; dy = 0; break;
  }
}

Heading rotate(Heading h, lang::Symbol egocentric) {
  int base = static_cast<int>(h);
  switch (egocentric) {
    case lang::Symbol::U: return h;
    case lang::Symbol::R: return static_cast<Heading>((base + 1) % 4);
    case lang::Symbol::D: return static_cast<Heading>((base + 2) % 4);
    case lang::Symbol::L: return static_cast<Heading>((base + 3) % 4);
  }
  return h;
}

lang::Symbol relative_symbol(Heading from, Heading to) {
  int diff = (static_cast<int>(to) - static_cast<int>(from) + 4) % 4;
  switch (diff) {
    case 0: return lang::Symbol::U;
    case 1: return lang::Symbol::R;
    case 2: return lang::Symbol::D;
    default: return lang::Symbol::L;
  }
}

std::optional<int> WorldMap::neighbor(int node, Heading h) const {
  for (const auto& [nb, dir] : adjacency[node])
    if (dir == h) return nb;
  return std::nullopt;
}

int WorldMap::edge_count() const {
  int twice = 0;
  for (const auto& adj : adjacency) twice += static_cast<int>(adj.size());
  return twice / 2;
}

double WorldMap::diagonal() const {
  return std::sqrt(width() * width() + height() * height());
}

int WorldMap::nearest_gateway(double x, double y) const {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::max();
  for (const auto& g : gateways) {
    double d2 = dist2(x, y, g.x, g.y);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = g.id;
    }
  }
  return best;
}

bool WorldMap::on_corridor(double x, double y) const {
  return std::any_of(corridors.begin(), corridors.end(),
                     [&](const Segment& s) { return s.contains(x, y); });
}

WorldMap generate_world(int rows, int cols, double cell_size,
                        std::uint64_t seed) {
  if (rows < 2 || cols < 2)
    throw std::invalid_argument("world grid must be at least 2x2");
  if (cell_size <= 0)
    throw std::invalid_argument("cell_size must be positive");

  WorldMap w;
  w.rows = rows;
  w.cols = cols;
  w.cell_size = cell_size;

  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      w.gateways.push_back({w.node_id(r, c), c * cell_size, r * cell_size});

  w.adjacency.resize(w.gateways.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int id = w.node_id(r, c);
      if (c + 1 < cols) {
        w.adjacency[id].emplace_back(w.node_id(r, c + 1), Heading::E);
        w.adjacency[w.node_id(r, c + 1)].emplace_back(id, Heading::W);
      }
      if (r + 1 < rows) {
        w.adjacency[id].emplace_back(w.node_id(r + 1, c), Heading::N);
        w.adjacency[w.node_id(r + 1, c)].emplace_back(id, Heading::S);
      }
    }
  }

  const double half = std::min(1.0, cell_size / 4.0);
  for (int r = 0; r < rows; ++r)
    w.corridors.push_back({-half, r * cell_size - half,
                           (cols - 1) * cell_size + half,
                           r * cell_size + half});
  for (int c = 0; c < cols; ++c)
    w.corridors.push_back({c * cell_size - half, -half,
                           c * cell_size + half,
                           (rows - 1) * cell_size + half});

  std::mt19937_64 rng(mix_seed(seed, 0x1770));
  const int n = rows * cols;
  w.spawn = static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));

  std::vector<int> dist = bfs_distances(w, w.spawn);
  const int min_dist = std::max(2, (rows + cols) / 2 - 1);
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i)
    if (dist[i] >= min_dist) candidates.push_back(i);
  if (candidates.empty()) {
    int far = static_cast<int>(std::max_element(dist.begin(), dist.end()) -
                               dist.begin());
    candidates.push_back(far);
  }
  w.goal = candidates[std::uniform_int_distribution<std::size_t>(
      0, candidates.size() - 1)(rng)];

  const auto& spawn_adj = w.adjacency[w.spawn];
  w.spawn_heading = spawn_adj[std::uniform_int_distribution<std::size_t>(
                                  0, spawn_adj.size() - 1)(rng)]
                        .second;
  return w;
}

int shortest_gateway_count(const WorldMap& world, int from, int to) {
  const int n = static_cast<int>(world.gateways.size());
  if (from < 0 || from >= n || to < 0 || to >= n)
    throw std::invalid_argument("gateway id out of range");
  std::vector<int> dist = bfs_distances(world, from);
  if (dist[to] < 0)
    throw std::runtime_error("gateway graph is not connected");
  return dist[to];
}

RobotState apply_reactive(const WorldMap& world, const RobotState& robot,
                          lang::Symbol symbol, bool* no_edge) {
  if (no_edge) *no_edge = false;
  int node = world.nearest_gateway(robot.x, robot.y);
  const Gateway& g = world.gateways[node];
  if (dist2(robot.x, robot.y, g.x, g.y) > kPosEps)
    throw std::logic_error("apply_reactive: robot is not at a gateway");
  RobotState out = robot;
  Heading wanted = rotate(robot.heading, symbol);
  if (world.neighbor(node, wanted).has_value())
    out.heading = wanted;
  else if (no_edge)
    *no_edge = true;
  return out;
}

void MovingBody::position_at(double t, double& x, double& y) const {
  double span = hi - lo;
  double pos;
  if (span <= 0) {
    pos = lo;
  } else {
    double phase = (start - lo) + dir0 * speed * t;
    double m = std::fmod(phase, 2 * span);
    if (m < 0) m += 2 * span;
    pos = lo + (m <= span ? m : 2 * span - m);
  }
  if (horizontal) {
    x = pos;
    y = fixed;
  } else {
    x = fixed;
    y = pos;
  }
}

std::string event_name(Event::Kind k) {
  switch (k) {
    case Event::Kind::GatewayReached: return "gateway";
    case Event::Kind::HumanDetected: return "human";
    case Event::Kind::TargetReached: return "target";
    case Event::Kind::EpisodeTimeout: return "timeout";
  }
  return "?";
}

namespace {

// Gateway the robot is standing on, if any.
std::optional<int> node_at(const WorldMap& w, double x, double y) {
  int node = w.nearest_gateway(x, y);
  const Gateway& g = w.gateways[node];
  if (dist2(x, y, g.x, g.y) <= kPosEps) return node;
  return std::nullopt;
}

// Next gateway ahead of a mid-corridor robot, or nullopt at a wall.
std::optional<int> node_ahead(const WorldMap& w, const RobotState& r) {
  const double cell = w.cell_size;
  switch (r.heading) {
    case Heading::E: {
      int row = static_cast<int>(std::llround(r.y / cell));
      int col = static_cast<int>(std::floor(r.x / cell + 1e-9)) + 1;
      if (col >= w.cols) return std::nullopt;
      return w.node_id(row, col);
    }
    case Heading::W: {
      int row = static_cast<int>(std::llround(r.y / cell));
      int col = static_cast<int>(std::ceil(r.x / cell - 1e-9)) - 1;
      if (col < 0) return std::nullopt;
      return w.node_id(row, col);
    }
    case Heading::N: {
      int col = static_cast<int>(std::llround(r.x / cell));
      int row = static_cast<int>(std::floor(r.y / cell + 1e-9)) + 1;
      if (row >= w.rows) return std::nullopt;
      return w.node_id(row, col);
    }
    case Heading::S: {
      int col = static_cast<int>(std::llround(r.x / cell));
      int row = static_cast<int>(std::ceil(r.y / cell - 1e-9)) - 1;
      if (row < 0) return std::nullopt;
      return w.node_id(row, col);
    }
  }
  return std::nullopt;
}

}  // namespace

Event advance_until_event(const WorldMap& world, RobotState& robot,
                          std::span<const MovingBody> bodies,
                          std::vector<char>& in_pass,
                          const DetectionParams& params) {
  if (in_pass.size() != bodies.size())
    in_pass.assign(bodies.size(), 0);

  const double r2 = params.human_radius * params.human_radius;
  double local = 0.0;

  // humans first; re-detection only after leaving the radius
  auto detect_human = [&]() -> std::optional<int> {
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      double hx, hy;
      bodies[i].position_at(robot.elapsed + local, hx, hy);
      bool inside = dist2(robot.x, robot.y, hx, hy) <= r2;
      if (!inside) {
        in_pass[i] = 0;
      } else if (!in_pass[i]) {
        in_pass[i] = 1;
        return static_cast<int>(i);
      }
    }
    return std::nullopt;
  };

  // pick the gateway the robot is walking toward
  std::optional<int> target;
  if (auto here = node_at(world, robot.x, robot.y)) {
    if (auto nb = world.neighbor(*here, robot.heading)) {
      target = *nb;
    } else {
      // facing a wall: the dead end itself is the decision point
      if (auto h = detect_human()) return {Event::Kind::HumanDetected, *h};
      return {Event::Kind::GatewayReached, *here};
    }
  } else {
    target = node_ahead(world, robot);
    if (!target) {
      // mid-corridor facing a wall; treat the nearest node as a dead end
      if (auto h = detect_human()) return {Event::Kind::HumanDetected, *h};
      return {Event::Kind::GatewayReached,
              world.nearest_gateway(robot.x, robot.y)};
    }
  }
  const Gateway& tg = world.gateways[*target];

  double dx = 0, dy = 0;
  heading_delta(robot.heading, dx, dy);
  while (true) {
    if (auto h = detect_human()) {
      robot.elapsed += local;
      return {Event::Kind::HumanDetected, *h};
    }

    double rem = std::sqrt(dist2(robot.x, robot.y, tg.x, tg.y));
    if (rem <= params.gateway_radius) {
      robot.x = tg.x;
      robot.y = tg.y;
      robot.elapsed += local + rem / params.robot_speed;
      if (*target == world.goal) return {Event::Kind::TargetReached, *target};
      return {Event::Kind::GatewayReached, *target};
    }

    double move = std::min(params.robot_speed * params.tick, rem);
    robot.x += move * dx;
    robot.y += move * dy;
    local += move / params.robot_speed;
  }
}

std::string dump_world(const WorldMap& world) {
  std::string out;
  nlohmann::json head{{"schema_version", 1},
                      {"type", "world"},
                      {"rows", world.rows},
                      {"cols", world.cols},
                      {"cell_size", world.cell_size},
                      {"spawn", world.spawn},
                      {"spawn_heading", std::string(1, heading_char(world.spawn_heading))},
                      {"goal", world.goal}};
  out += head.dump() + "\n";
  for (const auto& g : world.gateways) {
    nlohmann::json j{{"type", "gateway"}, {"id", g.id}, {"x", g.x}, {"y", g.y}};
    out += j.dump() + "\n";
  }
  for (std::size_t a = 0; a < world.adjacency.size(); ++a) {
    for (const auto& [b, dir] : world.adjacency[a]) {
      if (static_cast<int>(a) < b) {
        nlohmann::json j{{"type", "edge"},
                         {"a", static_cast<int>(a)},
                         {"b", b},
                         {"dir", std::string(1, heading_char(dir))}};
        out += j.dump() + "\n";
      }
    }
  }
  return out;
}

}  // namespace trustnav::sim
