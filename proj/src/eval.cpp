#include "trustnav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "trustnav/lang2sym.hpp"
#include "trustnav/rng.hpp"

namespace trustnav::eval {

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "learned") return PolicyKind::Learned;
  if (name == "random") return PolicyKind::Random;
  if (name == "gullible") return PolicyKind::Gullible;
  if (name == "skeptical") return PolicyKind::Skeptical;
  throw std::invalid_argument("unknown policy kind: " + name);
}

std::string policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Learned: return "learned";
    case PolicyKind::Random: return "random";
    case PolicyKind::Gullible: return "gullible";
    case PolicyKind::Skeptical: return "skeptical";
  }
  return "?";
}

namespace {
constexpr int kTopBucket = mdp::kTauBuckets - 1;
constexpr int kBottomBucket = 0;

int follow_action(lang::Symbol s, int bucket) {
  return mdp::encode_action(mdp::symbol_reactive(s), bucket);
}
}  // namespace

int gullible_policy(const mdp::Observation& obs) {
  if (obs.d_h() && !obs.has_symbol())
    return mdp::encode_action(mdp::Reactive::I, kTopBucket);
  if (obs.has_symbol() && !obs.d_h())
    return follow_action(obs.first_symbol(), kTopBucket);
  return mdp::encode_action(mdp::Reactive::U, kTopBucket);
}

int skeptical_policy(const mdp::Observation& obs, int& turn_state) {
  if (obs.d_h()) return mdp::encode_action(mdp::Reactive::I, kBottomBucket);
  if (obs.has_symbol() && obs.tau(0) >= 0.9)
    return follow_action(obs.first_symbol(), kBottomBucket);
  static constexpr mdp::Reactive kTurnCycle[3] = {
      mdp::Reactive::R, mdp::Reactive::U, mdp::Reactive::U};
  mdp::Reactive r = kTurnCycle[turn_state % 3];
  ++turn_state;
  return mdp::encode_action(r, kBottomBucket);
}

EpisodePolicy::EpisodePolicy(PolicyKind kind, const net::MlpParams* params)
    : kind_(kind), params_(params) {
  if (kind_ == PolicyKind::Learned && params_ == nullptr)
    throw std::invalid_argument("learned policy needs network parameters");
}

void EpisodePolicy::begin_episode(std::uint64_t episode_seed) {
  rng_ = make_rng(episode_seed, 0x6A11);
  turn_state_ = 0;
}

int EpisodePolicy::act(const mdp::Observation& obs) {
  switch (kind_) {
    case PolicyKind::Learned:
      return net::greedy_action(net::forward(*params_, obs.v));
    case PolicyKind::Random:
      return std::uniform_int_distribution<int>(0, mdp::kActionCount - 1)(rng_);
    case PolicyKind::Gullible:
      return gullible_policy(obs);
    case PolicyKind::Skeptical:
      return skeptical_policy(obs, turn_state_);
  }
  return 0;
}

std::string episode_record_json(int episode, const EpisodeRecord& r) {
  nlohmann::json j{{"schema_version", 1},
                   {"episode", episode},
                   {"seed", r.seed},
                   {"success", r.success},
                   {"gateways", r.gateways},
                   {"interactions", r.interactions},
                   {"elapsed", r.elapsed},
                   {"reward", r.reward},
                   {"mean_tau_r", r.mean_tau_r}};
  return j.dump();
}

EvalReport aggregate(const std::vector<EpisodeRecord>& records) {
  EvalReport rep;
  rep.episodes = static_cast<int>(records.size());
  if (records.empty()) return rep;
  for (const auto& r : records) {
    rep.success_rate += r.success ? 1.0 : 0.0;
    rep.mean_gateways += r.gateways;
    rep.mean_interactions += r.interactions;
    rep.mean_elapsed += r.elapsed;
    rep.mean_reward += r.reward;
    rep.mean_tau_r += r.mean_tau_r;
  }
  const double n = static_cast<double>(rep.episodes);
  rep.success_rate /= n;
  rep.mean_gateways /= n;
  rep.mean_interactions /= n;
  rep.mean_elapsed /= n;
  rep.mean_reward /= n;
  rep.mean_tau_r /= n;
  return rep;
}

EvalReport run_eval(const RunConfig& cfg, PolicyKind kind,
                    const net::MlpParams* params, int episodes,
                    std::uint64_t seed, std::vector<EpisodeRecord>* records) {
  if (episodes < 1) throw std::invalid_argument("episode count must be >= 1");
  mdp::TrustNavEnv env(cfg);
  EpisodePolicy policy(kind, params);

  std::vector<EpisodeRecord> local;
  local.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(ep));
    mdp::Observation obs = env.reset(ep_seed);
    policy.begin_episode(ep_seed);

    EpisodeRecord rec;
    rec.seed = ep_seed;
    double tau_sum = 0;
    int steps = 0;
    while (!env.done()) {
      int action = policy.act(obs);
      auto res = env.step(action);
      rec.reward += res.reward.total;
      tau_sum += res.info.tau_r;
      ++steps;
      if (res.info.event.kind == sim::Event::Kind::TargetReached)
        rec.success = true;
      obs = std::move(res.obs);
    }
    rec.gateways = env.gateways();
    rec.interactions = env.interactions();
    rec.elapsed = env.robot().elapsed;
    rec.mean_tau_r = steps > 0 ? tau_sum / steps : 0.0;
    local.push_back(rec);
  }
  if (records) *records = local;
  return aggregate(local);
}

std::vector<GridCell> compare_regimes(const RunConfig& base,
                                      const net::MlpParams* learned,
                                      const std::vector<RegimeSpec>& regimes,
                                      int episodes, std::uint64_t seed) {
  std::vector<PolicyKind> kinds;
  if (learned) kinds.push_back(PolicyKind::Learned);
  kinds.push_back(PolicyKind::Random);
  kinds.push_back(PolicyKind::Gullible);
  kinds.push_back(PolicyKind::Skeptical);

  std::vector<GridCell> grid;
  for (const auto& regime : regimes) {
    RunConfig cfg = base;
    cfg.env.sigma = regime.sigma;
    for (PolicyKind kind : kinds) {
      GridCell cell;
      cell.policy = policy_kind_name(kind);
      cell.regime = regime.name;
      cell.report = run_eval(cfg, kind,
                             kind == PolicyKind::Learned ? learned : nullptr,
                             episodes, seed);
      grid.push_back(std::move(cell));
    }
  }
  return grid;
}

std::string grid_csv(const std::vector<GridCell>& cells) {
  std::ostringstream out;
  out << "policy,regime,episodes,success_rate,mean_gateways,"
         "mean_interactions,mean_elapsed,mean_reward,mean_tau_r\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& c : cells) {
    out << c.policy << ',' << c.regime << ',' << c.report.episodes << ','
        << c.report.success_rate << ',' << c.report.mean_gateways << ','
        << c.report.mean_interactions << ',' << c.report.mean_elapsed << ','
        << c.report.mean_reward << ',' << c.report.mean_tau_r << '\n';
  }
  return out.str();
}

std::string render_world(const mdp::TrustNavEnv& env) {
  const sim::WorldMap& w = env.world();
  const int cw = 6, ch = 3;  // canvas cells per world cell
  const int width = (w.cols - 1) * cw + 1;
  const int height = (w.rows - 1) * ch + 1;
  std::vector<std::string> canvas(height, std::string(width, ' '));

  auto plot = [&](double x, double y, char c) {
    int cx = static_cast<int>(std::lround(x / w.cell_size * cw));
    int cy = static_cast<int>(std::lround(y / w.cell_size * ch));
    cx = std::clamp(cx, 0, width - 1);
    cy = std::clamp(cy, 0, height - 1);
    canvas[height - 1 - cy][cx] = c;  // north is up
  };

  for (std::size_t a = 0; a < w.adjacency.size(); ++a) {
    for (const auto& [b, dir] : w.adjacency[a]) {
      if (static_cast<int>(a) > b) continue;
      const auto& ga = w.gateways[a];
      const auto& gb = w.gateways[b];
      if (dir == sim::Heading::E || dir == sim::Heading::W) {
        for (int k = 1; k < cw; ++k)
          plot(std::min(ga.x, gb.x) + k * w.cell_size / cw, ga.y, '-');
      } else {
        for (int k = 1; k < ch; ++k)
          plot(ga.x, std::min(ga.y, gb.y) + k * w.cell_size / ch, '|');
      }
    }
  }
  for (const auto& g : w.gateways) plot(g.x, g.y, '+');
  plot(w.gateways[w.goal].x, w.gateways[w.goal].y, 'G');

  for (const auto& h : env.humans()) {
    double hx, hy;
    h.body.position_at(env.robot().elapsed, hx, hy);
    plot(hx, hy, 'h');
  }

  char arrow = '^';
  switch (env.robot().heading) {
    case sim::Heading::N: arrow = '^'; break;
    case sim::Heading::E: arrow = '>'; break;
    case sim::Heading::S: arrow = 'v'; break;
    case sim::Heading::W: arrow = '<'; break;
  }
  plot(env.robot().x, env.robot().y, arrow);

  std::string out;
  for (const auto& line : canvas) out += line + "\n";
  return out;
}

namespace {

void emit(std::ostream& out, std::ostream* transcript, const std::string& s) {
  out << s;
  if (transcript) *transcript << s;
}

}  // namespace

void demo_repl(std::istream& in, std::ostream& out, const RunConfig& cfg,
               const net::MlpParams& params, std::uint64_t seed,
               std::ostream* transcript) {
  mdp::TrustNavEnv env(cfg);
  mdp::Observation obs = env.reset(seed);

  emit(out, transcript,
       "— interactive guidance session —\n"
       "type directions when a human is detected; empty line lets the robot "
       "decide alone.\n\n");
  emit(out, transcript, render_world(env));

  while (!env.done()) {
    const sim::Event& ev = env.current_event();
    emit(out, transcript,
         "[event] " + sim::event_name(ev.kind) +
             (ev.id >= 0 ? " #" + std::to_string(ev.id) : "") + "\n");

    if (ev.kind == sim::Event::Kind::HumanDetected) {
      emit(out, transcript, "guidance> ");
      std::string line;
      if (!std::getline(in, line)) break;
      if (transcript) *transcript << line << "\n";
      if (!line.empty()) {
        lang::SymbolizerOptions opt{cfg.env.l_max, cfg.env.corridor_run};
        lang::ParsedUtterance parsed =
            lang::parse_utterance(line, cfg.affect, opt);
        if (parsed.guidance.symbols.empty()) {
          emit(out, transcript,
               "no directional content; robot continues on its own\n");
        } else {
          std::ostringstream msg;
          msg << "parsed symbols: "
              << lang::symbols_string(parsed.guidance.symbols)
              << "  confidences:";
          msg << std::fixed << std::setprecision(3);
          for (double c : parsed.guidance.confidences) msg << ' ' << c;
          msg << "  tau_h=" << parsed.guidance.tau_h << "\n";
          emit(out, transcript, msg.str());
          env.override_next_guidance(parsed.guidance);
        }
      }
    }

    int action = net::greedy_action(net::forward(params, obs.v));
    auto [reactive, tau_r] = mdp::decode_action(action);
    auto res = env.step(action);
    std::ostringstream msg;
    msg << std::fixed << std::setprecision(2);
    msg << "robot: " << mdp::reactive_name(reactive) << " (tau_r=" << tau_r
        << ")  reward=" << res.reward.total
        << "  elapsed=" << env.robot().elapsed << "s\n";
    emit(out, transcript, msg.str());
    emit(out, transcript, render_world(env) + "\n");
    obs = std::move(res.obs);
  }

  const bool reached =
      env.current_event().kind == sim::Event::Kind::TargetReached;
  emit(out, transcript,
       reached ? "target reached.\n" : "episode over (timeout).\n");
}

}  // namespace trustnav::eval
