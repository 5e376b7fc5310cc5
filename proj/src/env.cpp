#include "trustnav/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "trustnav/rng.hpp"

namespace trustnav::mdp {

namespace {
// tolerance on the bucket half-width comparison, so tau_h values landing
// exactly on a bucket edge count as matched
constexpr double kBucketHalfWidth = 0.05;
constexpr double kEdgeEps = 1e-9;
}  // namespace

std::pair<Reactive, double> decode_action(int id) {
  if (id < 0 || id >= kActionCount)
    throw std::out_of_range("action id outside [0,49]");
  return {static_cast<Reactive>(id / kTauBuckets),
          bucket_midpoint(id % kTauBuckets)};
}

int encode_action(Reactive r, int bucket) {
  return static_cast<int>(r) * kTauBuckets + bucket;
}

double bucket_midpoint(int bucket) { return (bucket + 0.5) / kTauBuckets; }

lang::Symbol reactive_symbol(Reactive r) {
  switch (r) {
    case Reactive::L: return lang::Symbol::L;
    case Reactive::R: return lang::Symbol::R;
    case Reactive::U: return lang::Symbol::U;
    case Reactive::D: return lang::Symbol::D;
    case Reactive::I: break;
  }
  throw std::invalid_argument("interaction has no directional symbol");
}

Reactive symbol_reactive(lang::Symbol s) {
  switch (s) {
    case lang::Symbol::L: return Reactive::L;
    case lang::Symbol::R: return Reactive::R;
    case lang::Symbol::U: return Reactive::U;
    case lang::Symbol::D: return Reactive::D;
  }
  throw std::invalid_argument("bad symbol");
}

std::string reactive_name(Reactive r) {
  switch (r) {
    case Reactive::L: return "L";
    case Reactive::R: return "R";
    case Reactive::U: return "U";
    case Reactive::D: return "D";
    case Reactive::I: return "I";
  }
  return "?";
}

lang::Symbol Observation::first_symbol() const {
  int code = static_cast<int>(std::lround(v[0] * 4.0));
  return static_cast<lang::Symbol>(code);
}

RewardBreakdown immediate_reward(const ActionContext& ctx, Reactive action,
                                 double tau_r, const RewardConfig& rew) {
  RewardBreakdown rb;
  if (ctx.d_h && ctx.n_i < rew.i_min && action != Reactive::I)
    rb.r_i = rew.r_nointer;
  else if (!ctx.d_h && action == Reactive::I)
    rb.r_i = rew.r_wronginter;

  if (ctx.at_gateway && ctx.cursor_live && action != Reactive::I &&
      reactive_symbol(action) == ctx.expected) {
    double delta = std::abs(ctx.tau_h_t - tau_r);
    double r_trust = delta <= kBucketHalfWidth + kEdgeEps
                         ? rew.r_optimal
                         : -rew.w_o * delta;
    rb.r_s = rew.r_follow + r_trust;
  }
  rb.total = rb.r_i + rb.r_t + rb.r_g + rb.r_s;
  return rb;
}

double target_reward(bool target_reached, const RewardConfig& rew) {
  return target_reached ? rew.r_reached : 0.0;
}

double gateway_reward(bool at_goal, int n_g, int n_gmin,
                      const RewardConfig& rew) {
  if (at_goal && n_g == n_gmin) return rew.r_gmin;
  if (n_g > n_gmin) return -rew.w_n * (n_g - n_gmin);
  return 0.0;
}

TrustNavEnv::TrustNavEnv(const RunConfig& cfg) : cfg_(cfg) {
  validate_config(cfg_);
  world_ = sim::generate_world(cfg_.env.rows, cfg_.env.cols,
                               cfg_.env.cell_size, cfg_.env.world_seed);
  field_ = sim::trust_field_for(cfg_.env, world_);
  params_ = {cfg_.env.human_radius, cfg_.env.gateway_radius,
             cfg_.env.robot_speed, cfg_.env.interaction_cost, cfg_.env.tick};
  n_gmin_ = sim::shortest_gateway_count(world_, world_.spawn, world_.goal);
}

Observation TrustNavEnv::reset(std::uint64_t episode_seed) {
  rng_ = make_rng(episode_seed, 0xE9150DE);
  int n = std::uniform_int_distribution<int>(cfg_.env.h_min,
                                             cfg_.env.h_max)(rng_);
  humans_ = sim::sample_population(world_, n, field_, cfg_.env.h_min,
                                   cfg_.env.h_max, cfg_.env.l_max, rng_);
  bodies_.clear();
  for (const auto& h : humans_) bodies_.push_back(h.body);
  in_pass_.assign(bodies_.size(), 0);

  const sim::Gateway& s = world_.gateways[world_.spawn];
  robot_ = {s.x, s.y, world_.spawn_heading, 0.0};
  cursor_ = {};
  cursor_t_ = 0;
  n_i_ = 0;
  n_g_ = 0;
  steps_ = 0;
  done_ = false;
  override_guidance_.reset();

  // first event: a human already in range wins, otherwise the spawn gateway
  event_ = {sim::Event::Kind::GatewayReached, world_.spawn};
  const double r2 = params_.human_radius * params_.human_radius;
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    double hx, hy;
    bodies_[i].position_at(0.0, hx, hy);
    double dx = hx - robot_.x, dy = hy - robot_.y;
    if (dx * dx + dy * dy <= r2) {
      in_pass_[i] = 1;
      event_ = {sim::Event::Kind::HumanDetected, static_cast<int>(i)};
      break;
    }
  }
  return observe();
}

ActionContext TrustNavEnv::action_context() const {
  ActionContext ctx;
  ctx.d_h = event_.kind == sim::Event::Kind::HumanDetected;
  ctx.at_gateway = event_.kind == sim::Event::Kind::GatewayReached;
  ctx.n_i = n_i_;
  ctx.cursor_live = cursor_live();
  if (ctx.cursor_live) {
    ctx.expected = cursor_.symbols[cursor_t_];
    ctx.tau_h_t = cursor_.confidences[cursor_t_];
  }
  return ctx;
}

TrustNavEnv::StepResult TrustNavEnv::step(int action_id) {
  if (done_) throw std::logic_error("step() called on a finished episode");

  auto [reactive, tau_r] = decode_action(action_id);
  StepInfo info;
  info.reactive = reactive;
  info.tau_r = tau_r;

  const ActionContext ctx = action_context();
  RewardBreakdown rb = immediate_reward(ctx, reactive, tau_r, cfg_.rewards);
  if (ctx.at_gateway && ctx.cursor_live && reactive != Reactive::I &&
      reactive_symbol(reactive) == ctx.expected) {
    ++cursor_t_;
    info.followed = true;
  }

  if (reactive == Reactive::I) {
    if (ctx.d_h) {
      sim::SimHuman& h = humans_[event_.id];
      h.body.position_at(robot_.elapsed, h.x, h.y);
      if (override_guidance_) {
        h.guidance = std::move(*override_guidance_);
        override_guidance_.reset();
      } else {
        h.guidance = sim::generate_guidance(h.x, h.y, robot_.heading,
                                            h.mental_map, world_, field_,
                                            cfg_.env.l_max, rng_);
      }
      cursor_ = h.guidance;
      cursor_t_ = 0;
      ++n_i_;
      robot_.elapsed += params_.interaction_cost;
      info.interacted = true;
    } else {
      info.wrong_interaction = true;
    }
  } else if (ctx.at_gateway) {
    robot_ = sim::apply_reactive(world_, robot_, reactive_symbol(reactive),
                                 &info.no_edge);
  }

  ++steps_;
  event_ = sim::advance_until_event(world_, robot_, bodies_, in_pass_, params_);
  if (event_.kind == sim::Event::Kind::GatewayReached) ++n_g_;
  if (event_.kind == sim::Event::Kind::TargetReached) {
    ++n_g_;
    rb.r_t = target_reward(true, cfg_.rewards);
    done_ = true;
  }
  if (!done_ && steps_ >= cfg_.env.episode_cap) {
    done_ = true;
    info.timeout = true;
  }
  if (done_)
    rb.r_g = gateway_reward(event_.kind == sim::Event::Kind::TargetReached,
                            n_g_, n_gmin_, cfg_.rewards);

  rb.total = rb.r_i + rb.r_t + rb.r_g + rb.r_s;
  info.event = info.timeout
                   ? sim::Event{sim::Event::Kind::EpisodeTimeout, -1}
                   : event_;
  return {observe(), rb, done_, info};
}

Observation TrustNavEnv::observe() const {
  const int m = cfg_.env.l_max;
  Observation obs;
  obs.l_max = m;
  obs.v.assign(2 * m + 4, 0.0);
  for (int i = 0; i < m; ++i) {
    int t = cursor_t_ + i;
    if (t < static_cast<int>(cursor_.symbols.size())) {
      obs.v[i] = static_cast<double>(static_cast<int>(cursor_.symbols[t])) / 4.0;
      obs.v[m + i] = cursor_.confidences[t];
    }
  }
  const double cap = static_cast<double>(cfg_.env.episode_cap);
  obs.v[2 * m] = n_i_ / cap;
  obs.v[2 * m + 1] = n_g_ / cap;
  obs.v[2 * m + 2] =
      event_.kind == sim::Event::Kind::HumanDetected ? 1.0 : 0.0;
  obs.v[2 * m + 3] =
      event_.kind == sim::Event::Kind::TargetReached ? 1.0 : 0.0;
  return obs;
}

void TrustNavEnv::override_next_guidance(lang::ScoredGuidance g) {
  override_guidance_ = std::move(g);
}

namespace {

nlohmann::json guidance_to_json(const lang::ScoredGuidance& g) {
  return {{"symbols", lang::symbols_string(g.symbols)},
          {"conf", g.confidences},
          {"tau_h", g.tau_h}};
}

lang::ScoredGuidance guidance_from_json(const nlohmann::json& j) {
  lang::ScoredGuidance g;
  std::string s = j.at("symbols").get<std::string>();
  for (char c : s)
    if (c != ',') g.symbols.push_back(lang::symbol_from_char(c));
  g.confidences = j.at("conf").get<std::vector<double>>();
  g.tau_h = j.at("tau_h").get<double>();
  return g;
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void rng_from_string(std::mt19937_64& rng, const std::string& s) {
  std::istringstream in(s);
  in >> rng;
}

}  // namespace

nlohmann::json TrustNavEnv::state_to_json() const {
  nlohmann::json j;
  j["rng"] = rng_to_string(rng_);
  j["robot"] = {{"x", robot_.x},
                {"y", robot_.y},
                {"heading", std::string(1, sim::heading_char(robot_.heading))},
                {"elapsed", robot_.elapsed}};
  j["event"] = {{"kind", static_cast<int>(event_.kind)}, {"id", event_.id}};
  j["cursor"] = guidance_to_json(cursor_);
  j["cursor_t"] = cursor_t_;
  j["n_i"] = n_i_;
  j["n_g"] = n_g_;
  j["steps"] = steps_;
  j["done"] = done_;
  j["in_pass"] = std::vector<int>(in_pass_.begin(), in_pass_.end());
  nlohmann::json humans = nlohmann::json::array();
  for (const auto& h : humans_) {
    humans.push_back({{"id", h.id},
                      {"corridor", h.corridor},
                      {"x", h.x},
                      {"y", h.y},
                      {"trust", h.trust},
                      {"believed_goal", h.mental_map.believed_goal},
                      {"body",
                       {{"horizontal", h.body.horizontal},
                        {"fixed", h.body.fixed},
                        {"lo", h.body.lo},
                        {"hi", h.body.hi},
                        {"start", h.body.start},
                        {"dir0", h.body.dir0},
                        {"speed", h.body.speed}}},
                      {"guidance", guidance_to_json(h.guidance)}});
  }
  j["humans"] = humans;
  return j;
}

void TrustNavEnv::state_from_json(const nlohmann::json& j) {
  rng_from_string(rng_, j.at("rng").get<std::string>());
  const auto& r = j.at("robot");
  robot_.x = r.at("x").get<double>();
  robot_.y = r.at("y").get<double>();
  robot_.heading =
      sim::heading_from_char(r.at("heading").get<std::string>()[0]);
  robot_.elapsed = r.at("elapsed").get<double>();
  event_.kind = static_cast<sim::Event::Kind>(j.at("event").at("kind").get<int>());
  event_.id = j.at("event").at("id").get<int>();
  cursor_ = guidance_from_json(j.at("cursor"));
  cursor_t_ = j.at("cursor_t").get<int>();
  n_i_ = j.at("n_i").get<int>();
  n_g_ = j.at("n_g").get<int>();
  steps_ = j.at("steps").get<int>();
  done_ = j.at("done").get<bool>();
  auto pass = j.at("in_pass").get<std::vector<int>>();
  in_pass_.assign(pass.begin(), pass.end());
  humans_.clear();
  bodies_.clear();
  for (const auto& hj : j.at("humans")) {
    sim::SimHuman h;
    h.id = hj.at("id").get<int>();
    h.corridor = hj.at("corridor").get<int>();
    h.x = hj.at("x").get<double>();
    h.y = hj.at("y").get<double>();
    h.trust = hj.at("trust").get<double>();
    h.mental_map.adjacency = world_.adjacency;
    h.mental_map.believed_goal = hj.at("believed_goal").get<int>();
    const auto& b = hj.at("body");
    h.body.horizontal = b.at("horizontal").get<bool>();
    h.body.fixed = b.at("fixed").get<double>();
    h.body.lo = b.at("lo").get<double>();
    h.body.hi = b.at("hi").get<double>();
    h.body.start = b.at("start").get<double>();
    h.body.dir0 = b.at("dir0").get<int>();
    h.body.speed = b.at("speed").get<double>();
    h.guidance = guidance_from_json(hj.at("guidance"));
    humans_.push_back(std::move(h));
    bodies_.push_back(humans_.back().body);
  }
}

}  // namespace trustnav::mdp
