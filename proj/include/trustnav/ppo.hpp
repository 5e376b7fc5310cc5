#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "trustnav/config.hpp"
#include "trustnav/env.hpp"
#include "trustnav/mlp.hpp"

namespace trustnav::rl {

struct RolloutBuffer {
  std::vector<std::vector<double>> obs;
  std::vector<int> actions;
  std::vector<double> logps;
  std::vector<double> rewards;  // RewardBreakdown totals
  std::vector<double> values;
  std::vector<char> dones;      // episode ended at this step
  double bootstrap_value = 0;   // value of the state after the last step

  // per-rollout bookkeeping
  int episodes = 0;
  int successes = 0;
  double episode_reward_sum = 0;  // over completed episodes
  double tau_r_sum = 0;           // over all steps

  int size() const { return static_cast<int>(actions.size()); }
};

// Samples `horizon` steps from the current policy, resetting the environment
// at episode boundaries. Episode seeds come from `episode_counter`, which
// advances by one per reset.
struct Collector {
  mdp::TrustNavEnv env;
  std::uint64_t seed_base = 0;
  std::uint64_t episode_counter = 0;
  double pending_episode_reward = 0;
  bool fresh = true;

  explicit Collector(const RunConfig& cfg, std::uint64_t seed_base);
};

RolloutBuffer collect_rollouts(Collector& col, const net::MlpParams& params,
                               int horizon, std::mt19937_64& rng);

struct GaeResult {
  std::vector<double> advantages;      // normalized (zero mean, unit variance)
  std::vector<double> raw_advantages;  // before normalization
  std::vector<double> returns;         // raw advantages + values
};

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                      bool normalize = true);

// Plain SGD or Adam over the flat parameter vector.
struct Optimizer {
  std::string kind = "adam";
  double lr = 3e-4;
  long long t = 0;
  std::vector<double> m, v;

  void step(std::vector<double>& params, const std::vector<double>& grad);
};

struct UpdateStats {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double clip_fraction = 0;
  int minibatches = 0;
};

// epochs x minibatches of single gradient steps on the clipped objective.
// Throws on a non-finite loss with diagnostics.
UpdateStats ppo_update(net::MlpParams& params, Optimizer& opt,
                       const RolloutBuffer& buffer, const GaeResult& gae,
                       const TrainConfig& cfg, std::mt19937_64& shuffle_rng);

struct UpdateRecord {
  int update = 0;
  long long step = 0;       // global env steps after this update
  int steps_in_update = 0;
  int episodes = 0;
  double mean_episode_reward = 0;
  double success_rate = 0;
  double mean_tau_r = 0;
  double sum_tau_r = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double clip_fraction = 0;
};

std::string record_to_json(const UpdateRecord& r);

struct TrainResult {
  net::MlpParams params;
  std::vector<UpdateRecord> records;
  std::filesystem::path final_checkpoint;
};

using UpdateCallback = std::function<void(const UpdateRecord&)>;

// Full training run: writes metrics.jsonl, checkpoint_<step> files and the
// canonical config echo into out_dir. `resume` continues a checkpointed run
// and reproduces the uninterrupted one exactly.
TrainResult train(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& resume = {},
                  const UpdateCallback& on_update = {});

// checkpoint_<step> = network parameter block + JSON trailer with the full
// training state (optimizer, generators, environment, counters).
void save_checkpoint(const std::filesystem::path& path,
                     const net::MlpParams& params,
                     const nlohmann::json& trailer);
net::MlpParams load_checkpoint_params(const std::filesystem::path& path);
nlohmann::json load_checkpoint_trailer(const std::filesystem::path& path);

}  // namespace trustnav::rl
