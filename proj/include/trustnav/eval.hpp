#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trustnav/config.hpp"
#include "trustnav/env.hpp"
#include "trustnav/mlp.hpp"

namespace trustnav::eval {

enum class PolicyKind { Learned, Random, Gullible, Skeptical };

PolicyKind policy_kind_from_string(const std::string& name);
std::string policy_kind_name(PolicyKind kind);

// Follows every instruction and asks whenever it has none; always claims
// maximum trust.
int gullible_policy(const mdp::Observation& obs);

// Interacts at every encounter but follows only near-certain guidance;
// otherwise explores by a fixed turn cycle kept in `turn_state`.
int skeptical_policy(const mdp::Observation& obs, int& turn_state);

// Uniform policy dispatcher; owns the per-episode state the scripted and
// random policies need.
class EpisodePolicy {
 public:
  EpisodePolicy(PolicyKind kind, const net::MlpParams* params);
  void begin_episode(std::uint64_t episode_seed);
  int act(const mdp::Observation& obs);

 private:
  PolicyKind kind_;
  const net::MlpParams* params_;
  std::mt19937_64 rng_;
  int turn_state_ = 0;
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  bool success = false;
  int gateways = 0;
  int interactions = 0;
  double elapsed = 0;
  double reward = 0;
  double mean_tau_r = 0;
};

std::string episode_record_json(int episode, const EpisodeRecord& r);

struct EvalReport {
  int episodes = 0;
  double success_rate = 0;
  double mean_gateways = 0;
  double mean_interactions = 0;
  double mean_elapsed = 0;
  double mean_reward = 0;
  double mean_tau_r = 0;
};

EvalReport aggregate(const std::vector<EpisodeRecord>& records);

// N seeded episodes under one policy (learned policies act greedily).
EvalReport run_eval(const RunConfig& cfg, PolicyKind kind,
                    const net::MlpParams* params, int episodes,
                    std::uint64_t seed,
                    std::vector<EpisodeRecord>* records = nullptr);

struct RegimeSpec {
  std::string name;
  double sigma;
};

struct GridCell {
  std::string policy;
  std::string regime;
  EvalReport report;
};

// Policy x regime grid over matched episode seeds.
std::vector<GridCell> compare_regimes(const RunConfig& base,
                                      const net::MlpParams* learned,
                                      const std::vector<RegimeSpec>& regimes,
                                      int episodes, std::uint64_t seed);

// CSV with a header row and 6-decimal fixed-point numbers.
std::string grid_csv(const std::vector<GridCell>& cells);

// Character-art view of the world at the current instant.
std::string render_world(const mdp::TrustNavEnv& env);

// Interactive episode: renders events, asks for typed guidance at human
// detections, parses it, and lets the policy decide. Everything written to
// `out` is mirrored to `transcript` when given.
void demo_repl(std::istream& in, std::ostream& out, const RunConfig& cfg,
               const net::MlpParams& params, std::uint64_t seed,
               std::ostream* transcript = nullptr);

}  // namespace trustnav::eval
