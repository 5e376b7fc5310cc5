#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustnav/lang2sym.hpp"

namespace trustnav::sim {

enum class Heading : int { N = 0, E = 1, S = 2, W = 3 };

char heading_char(Heading h);
Heading heading_from_char(char c);

// Unit displacement of a heading; N is +y, E is +x.
void heading_delta(Heading h, double& dx, double& dy);
Heading rotate(Heading h, lang::Symbol egocentric);
// Egocentric symbol that turns `from` into `to`.
lang::Symbol relative_symbol(Heading from, Heading to);

struct Gateway {
  int id;
  double x, y;
};

// Axis-aligned corridor rectangle.
struct Segment {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

struct WorldMap {
  int rows = 0, cols = 0;
  double cell_size = 0.0;
  std::vector<Gateway> gateways;
  // adjacency[node] = (neighbor id, compass direction toward it)
  std::vector<std::vector<std::pair<int, Heading>>> adjacency;
  std::vector<Segment> corridors;  // rows first, then columns
  int spawn = 0;
  Heading spawn_heading = Heading::E;
  int goal = 0;

  int node_id(int row, int col) const { return row * cols + col; }
  std::optional<int> neighbor(int node, Heading h) const;
  int edge_count() const;
  double width() const { return (cols - 1) * cell_size; }
  double height() const { return (rows - 1) * cell_size; }
  double diagonal() const;
  // nearest gateway by euclidean distance (lowest id wins ties)
  int nearest_gateway(double x, double y) const;
  bool on_corridor(double x, double y) const;
};

// Grid world of corridors with gateway nodes at the intersections. Spawn
// and goal are fixed per seed (goal at least max(2, (rows+cols)/2) hops out).
WorldMap generate_world(int rows, int cols, double cell_size,
                        std::uint64_t seed);

// BFS hop count between gateways; throws if unreachable.
int shortest_gateway_count(const WorldMap& world, int from, int to);

struct RobotState {
  double x = 0, y = 0;
  Heading heading = Heading::E;
  double elapsed = 0;  // seconds since episode start
};

// Rotates the robot egocentrically; a commanded direction without a corridor
// edge keeps the previous heading and sets *no_edge. Valid only at a gateway.
RobotState apply_reactive(const WorldMap& world, const RobotState& robot,
                          lang::Symbol symbol, bool* no_edge = nullptr);

// Ping-pong walker confined to one corridor line. Positions are a pure
// function of episode time, so replays are exact.
struct MovingBody {
  bool horizontal = true;  // moves along x if true, else along y
  double fixed = 0;        // the stationary coordinate
  double lo = 0, hi = 0;   // travel endpoints along the moving axis
  double start = 0;        // position along the axis at t = 0
  int dir0 = 1;            // +1 toward hi, -1 toward lo
  double speed = 1.0;      // m/s, constant per body

  void position_at(double t, double& x, double& y) const;
};

struct DetectionParams {
  double human_radius = 2.0;
  double gateway_radius = 0.5;
  double robot_speed = 1.0;
  double interaction_cost = 10.0;
  double tick = 0.05;
};

struct Event {
  enum class Kind { GatewayReached, HumanDetected, TargetReached, EpisodeTimeout };
  Kind kind = Kind::GatewayReached;
  int id = -1;  // gateway id or human index
};

std::string event_name(Event::Kind k);

// Moves the robot forward (and the bodies per their time law) until a human
// enters detection range or a gateway is reached. `in_pass[i]` suppresses
// re-detection of body i until it leaves the detection radius. Humans win
// ties within a tick.
Event advance_until_event(const WorldMap& world, RobotState& robot,
                          std::span<const MovingBody> bodies,
                          std::vector<char>& in_pass,
                          const DetectionParams& params);

// Gateway graph as line-delimited JSON for inspection.
std::string dump_world(const WorldMap& world);

}  // namespace trustnav::sim
