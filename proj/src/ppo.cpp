#include "trustnav/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "trustnav/rng.hpp"

namespace trustnav::rl {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void rng_restore(std::mt19937_64& rng, const std::string& s) {
  std::istringstream in(s);
  in >> rng;
}
}  // namespace

Collector::Collector(const RunConfig& cfg, std::uint64_t seed)
    : env(cfg), seed_base(seed) {}

RolloutBuffer collect_rollouts(Collector& col, const net::MlpParams& params,
                               int horizon, std::mt19937_64& rng) {
  RolloutBuffer buf;
  buf.obs.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    if (col.fresh || col.env.done()) {
      col.env.reset(mix_seed(col.seed_base, col.episode_counter++));
      col.pending_episode_reward = 0;
      col.fresh = false;
    }
    mdp::Observation obs = col.env.observe();
    net::PolicyOutput out = net::forward(params, obs.v);
    auto [action, logp] = net::sample_action(out, rng);

    mdp::TrustNavEnv::StepResult res = col.env.step(action);
    buf.obs.push_back(obs.v);
    buf.actions.push_back(action);
    buf.logps.push_back(logp);
    buf.rewards.push_back(res.reward.total);
    buf.values.push_back(out.value);
    buf.dones.push_back(res.done ? 1 : 0);
    buf.tau_r_sum += res.info.tau_r;

    col.pending_episode_reward += res.reward.total;
    if (res.done) {
      ++buf.episodes;
      buf.episode_reward_sum += col.pending_episode_reward;
      if (res.info.event.kind == sim::Event::Kind::TargetReached)
        ++buf.successes;
      col.pending_episode_reward = 0;
    }
  }
  buf.bootstrap_value =
      col.env.done() ? 0.0
                     : net::forward(params, col.env.observe().v).value;
  return buf;
}

GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                      bool normalize) {
  const int n = buffer.size();
  GaeResult g;
  g.raw_advantages.assign(n, 0.0);
  g.returns.assign(n, 0.0);

  double next_adv = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double not_done = buffer.dones[t] ? 0.0 : 1.0;
    const double next_value =
        t + 1 < n ? buffer.values[t + 1] : buffer.bootstrap_value;
    const double delta = buffer.rewards[t] + gamma * next_value * not_done -
                         buffer.values[t];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    g.raw_advantages[t] = next_adv;
  }
  for (int t = 0; t < n; ++t)
    g.returns[t] = g.raw_advantages[t] + buffer.values[t];

  g.advantages = g.raw_advantages;
  if (normalize && n > 1) {
    double mean = std::accumulate(g.advantages.begin(), g.advantages.end(),
                                  0.0) /
                  n;
    double var = 0.0;
    for (double a : g.advantages) var += (a - mean) * (a - mean);
    var /= n;
    double sd = std::sqrt(var);
    if (sd > 1e-12)
      for (double& a : g.advantages) a = (a - mean) / sd;
    else
      for (double& a : g.advantages) a -= mean;
  }
  return g;
}

void Optimizer::step(std::vector<double>& params,
                     const std::vector<double>& grad) {
  if (kind == "sgd") {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= lr * grad[i];
    return;
  }
  if (m.size() != params.size()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  ++t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
  }
}

UpdateStats ppo_update(net::MlpParams& params, Optimizer& opt,
                       const RolloutBuffer& buffer, const GaeResult& gae,
                       const TrainConfig& cfg, std::mt19937_64& shuffle_rng) {
  const int n = buffer.size();
  net::LossSpec spec{cfg.clip_eps, cfg.value_coef, cfg.entropy_coef};

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  std::vector<double> grad;
  std::vector<net::Sample> minibatch;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int start = 0; start < n; start += cfg.minibatch_size) {
      const int end = std::min(n, start + cfg.minibatch_size);
      minibatch.clear();
      for (int k = start; k < end; ++k) {
        int i = order[k];
        minibatch.push_back({buffer.obs[i], buffer.actions[i], buffer.logps[i],
                             gae.advantages[i], gae.returns[i]});
      }
      net::LossStats loss = net::backward(params, minibatch, spec, grad);
      if (!std::isfinite(loss.total))
        throw std::runtime_error(
            "ppo_update aborted: non-finite loss (policy=" +
            std::to_string(loss.policy) + ", value=" +
            std::to_string(loss.value) + ", entropy=" +
            std::to_string(loss.entropy) + ") at epoch " +
            std::to_string(epoch));
      opt.lr = cfg.learning_rate;
      opt.kind = cfg.optimizer;
      opt.step(params.flat, grad);

      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.clip_fraction += loss.clip_fraction;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    stats.policy_loss /= stats.minibatches;
    stats.value_loss /= stats.minibatches;
    stats.entropy /= stats.minibatches;
    stats.clip_fraction /= stats.minibatches;
  }
  return stats;
}

std::string record_to_json(const UpdateRecord& r) {
  nlohmann::json j{{"schema_version", 1},
                   {"update", r.update},
                   {"step", r.step},
                   {"steps_in_update", r.steps_in_update},
                   {"episodes", r.episodes},
                   {"mean_episode_reward", r.mean_episode_reward},
                   {"success_rate", r.success_rate},
                   {"mean_tau_r", r.mean_tau_r},
                   {"sum_tau_r", r.sum_tau_r},
                   {"policy_loss", r.policy_loss},
                   {"value_loss", r.value_loss},
                   {"entropy", r.entropy},
                   {"clip_fraction", r.clip_fraction}};
  return j.dump();
}

void save_checkpoint(const std::filesystem::path& path,
                     const net::MlpParams& params,
                     const nlohmann::json& trailer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  net::save_params(out, params);
  const std::string blob = trailer.dump();
  std::uint64_t len = blob.size();
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (len >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(b), 8);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

net::MlpParams load_checkpoint_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return net::load_params(in);
}

nlohmann::json load_checkpoint_trailer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  net::load_params(in);  // skip the parameter block
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("checkpoint has no training trailer: " +
                                    path.string());
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  std::string blob(len, '\0');
  in.read(blob.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("truncated checkpoint trailer: " +
                                    path.string());
  return nlohmann::json::parse(blob);
}

TrainResult train(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& resume,
                  const UpdateCallback& on_update) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream echo(out_dir / "config.ini");
    echo << serialize_config(cfg);
  }

  net::Shape shape{2 * cfg.env.l_max + 4, cfg.train.hidden1, cfg.train.hidden2,
                   mdp::kActionCount};
  net::MlpParams params = net::MlpParams::init(shape, mix_seed(cfg.train.seed, 1));
  Optimizer opt;
  opt.kind = cfg.train.optimizer;
  opt.lr = cfg.train.learning_rate;

  Collector col(cfg, mix_seed(cfg.train.seed, 2));
  std::mt19937_64 sample_rng = make_rng(cfg.train.seed, 3);
  std::mt19937_64 shuffle_rng = make_rng(cfg.train.seed, 4);

  const int total_updates =
      static_cast<int>(cfg.train.total_steps / cfg.train.horizon);
  int start_update = 0;
  long long global_step = 0;

  TrainResult result;

  if (resume) {
    params = load_checkpoint_params(*resume);
    nlohmann::json tr = load_checkpoint_trailer(*resume);
    start_update = tr.at("update").get<int>();
    global_step = tr.at("step").get<long long>();
    opt.kind = tr.at("optimizer").at("kind").get<std::string>();
    opt.t = tr.at("optimizer").at("t").get<long long>();
    opt.m = tr.at("optimizer").at("m").get<std::vector<double>>();
    opt.v = tr.at("optimizer").at("v").get<std::vector<double>>();
    rng_restore(sample_rng, tr.at("sample_rng").get<std::string>());
    rng_restore(shuffle_rng, tr.at("shuffle_rng").get<std::string>());
    col.episode_counter = tr.at("episode_counter").get<std::uint64_t>();
    col.pending_episode_reward = tr.at("pending_episode_reward").get<double>();
    col.fresh = tr.at("fresh").get<bool>();
    if (!col.fresh) col.env.state_from_json(tr.at("env_state"));
  }

  std::ofstream metrics(out_dir / "metrics.jsonl",
                        resume ? std::ios::app : std::ios::trunc);
  if (!metrics)
    throw std::runtime_error("cannot open metrics log in " + out_dir.string());

  auto write_checkpoint = [&](int update) {
    nlohmann::json trailer;
    trailer["schema_version"] = 1;
    trailer["update"] = update;
    trailer["step"] = global_step;
    trailer["optimizer"] = {{"kind", opt.kind},
                            {"t", opt.t},
                            {"m", opt.m},
                            {"v", opt.v}};
    trailer["sample_rng"] = rng_state(sample_rng);
    trailer["shuffle_rng"] = rng_state(shuffle_rng);
    trailer["episode_counter"] = col.episode_counter;
    trailer["pending_episode_reward"] = col.pending_episode_reward;
    trailer["fresh"] = col.fresh;
    if (!col.fresh) trailer["env_state"] = col.env.state_to_json();
    std::filesystem::path path =
        out_dir / ("checkpoint_" + std::to_string(global_step));
    save_checkpoint(path, params, trailer);
    return path;
  };

  std::filesystem::path last_checkpoint;
  for (int u = start_update; u < total_updates; ++u) {
    RolloutBuffer buf =
        collect_rollouts(col, params, cfg.train.horizon, sample_rng);
    GaeResult gae = compute_gae(buf, cfg.train.gamma, cfg.train.gae_lambda);
    UpdateStats stats = ppo_update(params, opt, buf, gae, cfg.train, shuffle_rng);
    global_step += buf.size();

    UpdateRecord rec;
    rec.update = u + 1;
    rec.step = global_step;
    rec.steps_in_update = buf.size();
    rec.episodes = buf.episodes;
    rec.mean_episode_reward =
        buf.episodes > 0 ? buf.episode_reward_sum / buf.episodes : 0.0;
    rec.success_rate =
        buf.episodes > 0 ? static_cast<double>(buf.successes) / buf.episodes
                         : 0.0;
    rec.mean_tau_r = buf.tau_r_sum / buf.size();
    rec.sum_tau_r = buf.tau_r_sum;
    rec.policy_loss = stats.policy_loss;
    rec.value_loss = stats.value_loss;
    rec.entropy = stats.entropy;
    rec.clip_fraction = stats.clip_fraction;
    result.records.push_back(rec);
    metrics << record_to_json(rec) << "\n";
    metrics.flush();
    if (!metrics)
      throw std::runtime_error(
          "metrics log write failed; training halted (resume from the last "
          "checkpoint)");
    if (on_update) on_update(rec);

    if ((u + 1) % cfg.train.checkpoint_interval == 0 || u + 1 == total_updates)
      last_checkpoint = write_checkpoint(u + 1);
  }

  result.params = std::move(params);
  result.final_checkpoint = last_checkpoint;
  return result;
}

}  // namespace trustnav::rl
