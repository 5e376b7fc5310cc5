#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "trustnav/config.hpp"
#include "trustnav/human.hpp"
#include "trustnav/lang2sym.hpp"
#include "trustnav/world.hpp"

namespace trustnav::mdp {

// Reactive commands in flat-action order: action id = reactive * 10 + bucket.
enum class Reactive : int { L = 0, R = 1, U = 2, D = 3, I = 4 };

constexpr int kTauBuckets = 10;
constexpr int kActionCount = 50;

// Decodes a flat action id into (reactive command, tau_r bucket midpoint).
std::pair<Reactive, double> decode_action(int id);
int encode_action(Reactive r, int bucket);
double bucket_midpoint(int bucket);

lang::Symbol reactive_symbol(Reactive r);     // throws for I
Reactive symbol_reactive(lang::Symbol s);
std::string reactive_name(Reactive r);

// Flat numeric observation; layout (with m = l_max):
//   [0, m)    symbol codes / 4 (U=1, D=2, L=3, R=4; 0 pads)
//   [m, 2m)   per-symbol confidences tau_h (0 pads)
//   2m        interactions / episode_cap
//   2m + 1    gateways / episode_cap
//   2m + 2    human detected flag
//   2m + 3    target detected flag
struct Observation {
  std::vector<double> v;
  int l_max = 5;

  double sym_code(int i) const { return v[i]; }
  double tau(int i) const { return v[l_max + i]; }
  double n_i_norm() const { return v[2 * l_max]; }
  double n_g_norm() const { return v[2 * l_max + 1]; }
  bool d_h() const { return v[2 * l_max + 2] > 0.5; }
  bool d_t() const { return v[2 * l_max + 3] > 0.5; }
  bool has_symbol() const { return v[0] != 0.0; }
  lang::Symbol first_symbol() const;  // requires has_symbol()
};

struct RewardBreakdown {
  double r_i = 0, r_t = 0, r_g = 0, r_s = 0;
  double total = 0;
};

// State visible to the reward rules when an action is chosen.
struct ActionContext {
  bool d_h = false;         // current event is a human detection
  bool at_gateway = false;  // current event is a gateway decision
  int n_i = 0;              // interactions so far
  bool cursor_live = false;
  lang::Symbol expected = lang::Symbol::U;  // S[t] when cursor_live
  double tau_h_t = 0.0;                     // tau_h[t] when cursor_live
};

// r_i and r_s, the parts decided by the chosen action.
RewardBreakdown immediate_reward(const ActionContext& ctx, Reactive action,
                                 double tau_r, const RewardConfig& rew);
// r_t on arrival.
double target_reward(bool target_reached, const RewardConfig& rew);
// r_g, settled once at episode end.
double gateway_reward(bool at_goal, int n_g, int n_gmin,
                      const RewardConfig& rew);

struct StepInfo {
  sim::Event event;               // event produced by this step
  double tau_r = 0;
  Reactive reactive = Reactive::U;
  bool interacted = false;
  bool wrong_interaction = false;
  bool followed = false;
  bool no_edge = false;
  bool timeout = false;
};

// Event-triggered MDP over the corridor world. One instance owns one episode
// at a time; instances are independent and copyable.
class TrustNavEnv {
 public:
  explicit TrustNavEnv(const RunConfig& cfg);

  Observation reset(std::uint64_t episode_seed);

  struct StepResult {
    Observation obs;
    RewardBreakdown reward;
    bool done = false;
    StepInfo info;
  };
  StepResult step(int action_id);

  Observation observe() const;
  int observation_dim() const { return 2 * cfg_.env.l_max + 4; }

  const RunConfig& config() const { return cfg_; }
  const sim::WorldMap& world() const { return world_; }
  const sim::TrustField& trust_field() const { return field_; }
  const sim::RobotState& robot() const { return robot_; }
  const std::vector<sim::SimHuman>& humans() const { return humans_; }
  const sim::Event& current_event() const { return event_; }
  const lang::ScoredGuidance& cursor() const { return cursor_; }
  int cursor_index() const { return cursor_t_; }
  bool cursor_live() const {
    return cursor_t_ < static_cast<int>(cursor_.symbols.size());
  }
  int interactions() const { return n_i_; }
  int gateways() const { return n_g_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  int n_gmin() const { return n_gmin_; }

  // The next successful interaction hands over this guidance instead of the
  // simulated human's own answer (interactive sessions).
  void override_next_guidance(lang::ScoredGuidance g);

  // Full episode state, exact enough to resume training runs bit-for-bit.
  nlohmann::json state_to_json() const;
  void state_from_json(const nlohmann::json& j);

 private:
  ActionContext action_context() const;

  RunConfig cfg_;
  sim::WorldMap world_;
  sim::TrustField field_;
  sim::DetectionParams params_;
  int n_gmin_ = 0;

  std::mt19937_64 rng_;
  std::vector<sim::SimHuman> humans_;
  std::vector<sim::MovingBody> bodies_;
  std::vector<char> in_pass_;
  sim::RobotState robot_;
  sim::Event event_;
  lang::ScoredGuidance cursor_;
  int cursor_t_ = 0;
  int n_i_ = 0;
  int n_g_ = 0;
  int steps_ = 0;
  bool done_ = true;
  std::optional<lang::ScoredGuidance> override_guidance_;
};

}  // namespace trustnav::mdp
