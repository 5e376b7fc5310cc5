#pragma once

#include <random>
#include <vector>

#include "trustnav/lang2sym.hpp"
#include "trustnav/world.hpp"

namespace trustnav::sim {

// Trust falls off with distance from the goal: people far away are assumed
// to know the way less well.
struct TrustField {
  double x_g = 0, y_g = 0;
  double sigma = 1.0;
};

// Peak-normalized 2D Gaussian: 1 at the goal, exp(-1/2) one sigma out.
double gaussian_trust(double x, double y, const TrustField& field);

// Human's internal map: the gateway graph plus where they believe the goal is.
struct MentalMap {
  std::vector<std::vector<std::pair<int, Heading>>> adjacency;
  int believed_goal = 0;
};

// Returns true_goal with probability `trust`, otherwise a uniformly chosen
// graph neighbor of it.
int perturb_goal(const std::vector<std::vector<std::pair<int, Heading>>>& adjacency,
                 int true_goal, double trust, std::mt19937_64& rng);

struct SimHuman {
  int id = 0;
  MovingBody body;
  double x = 0, y = 0;  // position at generation time
  int corridor = 0;     // corridor segment index
  MentalMap mental_map;
  double trust = 1.0;   // gaussian_trust at the generation position
  lang::ScoredGuidance guidance;
};

// Directions from the gateway nearest (hx,hy) to the believed goal: one
// shortest path sampled uniformly, rendered as egocentric symbols for a
// robot facing robot_heading. Every symbol carries the human's trust value.
lang::ScoredGuidance generate_guidance(double hx, double hy,
                                       Heading robot_heading,
                                       const MentalMap& map,
                                       const WorldMap& world,
                                       const TrustField& field, int l_max,
                                       std::mt19937_64& rng);

// n humans on uniformly chosen corridors with speeds in [0.8, 1.2] m/s.
// n must lie in [h_min, h_max].
std::vector<SimHuman> sample_population(const WorldMap& world, int n,
                                        const TrustField& field, int h_min,
                                        int h_max, int l_max,
                                        std::mt19937_64& rng);

// Sigma actually used for a config: explicit value, or diagonal/3 when 0.
double resolved_sigma(const EnvConfig& env, const WorldMap& world);
TrustField trust_field_for(const EnvConfig& env, const WorldMap& world);

}  // namespace trustnav::sim
