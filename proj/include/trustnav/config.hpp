#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace trustnav {

// Thrown on any config problem; the message always names the offending
// key path (e.g. "env.sigma").
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EnvConfig {
  int rows = 3;
  int cols = 4;
  double cell_size = 5.0;
  std::uint64_t world_seed = 2;
  double human_radius = 2.0;
  double gateway_radius = 0.5;
  double robot_speed = 1.0;       // m/s
  double interaction_cost = 10.0; // simulated seconds per interaction
  double tick = 0.05;             // simulation tick, seconds
  int l_max = 5;                  // max guidance symbols
  int episode_cap = 15;           // events per episode
  int h_min = 2;
  int h_max = 6;
  double sigma = 0.0;             // trust field stddev; 0 = world diagonal / 3
  int corridor_run = 2;           // U symbols emitted for "end of the corridor"
};

struct RewardConfig {
  double r_nointer = -10.0;
  double r_wronginter = -5.0;
  double r_reached = 100.0;
  double r_gmin = 20.0;
  double w_n = 5.0;
  double r_follow = 5.0;
  double w_o = 10.0;
  double r_optimal = 10.0;
  int i_min = 1;
};

struct TrainConfig {
  double learning_rate = 3e-4;
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs_per_update = 4;
  int minibatch_size = 64;
  int horizon = 256;
  long long total_steps = 10000;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  std::uint64_t seed = 0;
  int hidden1 = 64;
  int hidden2 = 64;
  std::string optimizer = "adam"; // "adam" or "sgd"
  int checkpoint_interval = 10;   // updates between checkpoints
};

struct AffectConfig {
  double a_rep = 0.75;
  double a_hes = 0.5;
  double a_unc = 0.5;
  std::vector<std::string> fillers = {"uhh", "umm", "err", "er",
                                      "uh",  "hmm", "ah"};
  std::vector<std::string> hedges = {"probably", "maybe",   "may",
                                     "might",    "perhaps", "i think",
                                     "i guess",  "not sure"};
  std::vector<std::string> repair_cues = {"i mean", "no",   "no-no",
                                          "sorry",  "wait", "actually"};
};

struct RunConfig {
  EnvConfig env;
  RewardConfig rewards;
  TrainConfig train;
  AffectConfig affect;
};

RunConfig default_config();

// Parses INI-style text: [section] headers, key = value lines, '#' comments.
// Unknown sections/keys and out-of-range values raise ConfigError naming the
// key path. Missing keys keep their defaults.
RunConfig parse_config(const std::string& text);

// Reads and parses a config file; missing file raises ConfigError.
RunConfig load_config(const std::filesystem::path& path);

// Canonical text form: every key in documented order. parse(serialize(c))
// reproduces c, and serialize is a fixed point of load -> serialize.
std::string serialize_config(const RunConfig& cfg);

// Range checks for a fully-assembled config (also run by parse/load).
void validate_config(const RunConfig& cfg);

// All documented key paths ("env.rows", ...), in canonical order.
const std::vector<std::string>& documented_keys();

}  // namespace trustnav
