#include "trustnav/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace trustnav {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& path, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(path + ": not a number: '" + v + "'");
  return out;
}

long long parse_ll(const std::string& path, const std::string& v) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(path + ": not an integer: '" + v + "'");
  return out;
}

int parse_int(const std::string& path, const std::string& v) {
  long long ll = parse_ll(path, v);
  if (ll < INT32_MIN || ll > INT32_MAX)
    throw ConfigError(path + ": integer out of range: '" + v + "'");
  return static_cast<int>(ll);
}

std::uint64_t parse_u64(const std::string& path, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(path + ": not an unsigned integer: '" + v + "'");
  return out;
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) items.push_back(cur);
  }
  return items;
}

std::string fmt_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

struct KeyDef {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define KEY_D(sec, name, field)                                         \
  KeyDef{#sec, #name, [](const RunConfig& c) { return fmt_double(c.field); }, \
         [](RunConfig& c, const std::string& p, const std::string& v) { \
           c.field = parse_double(p, v);                                \
         }}
#define KEY_I(sec, name, field)                                              \
  KeyDef{#sec, #name, [](const RunConfig& c) { return std::to_string(c.field); }, \
         [](RunConfig& c, const std::string& p, const std::string& v) {      \
           c.field = parse_int(p, v);                                        \
         }}
#define KEY_LL(sec, name, field)                                             \
  KeyDef{#sec, #name, [](const RunConfig& c) { return std::to_string(c.field); }, \
         [](RunConfig& c, const std::string& p, const std::string& v) {      \
           c.field = parse_ll(p, v);                                         \
         }}
#define KEY_U64(sec, name, field)                                            \
  KeyDef{#sec, #name, [](const RunConfig& c) { return std::to_string(c.field); }, \
         [](RunConfig& c, const std::string& p, const std::string& v) {      \
           c.field = parse_u64(p, v);                                        \
         }}
#define KEY_S(sec, name, field)                                       \
  KeyDef{#sec, #name, [](const RunConfig& c) { return c.field; },     \
         [](RunConfig& c, const std::string&, const std::string& v) { \
           c.field = v;                                               \
         }}
#define KEY_LIST(sec, name, field)                                          \
  KeyDef{#sec, #name, [](const RunConfig& c) { return fmt_list(c.field); }, \
         [](RunConfig& c, const std::string&, const std::string& v) {       \
           c.field = parse_list(v);                                         \
         }}

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      KEY_I(env, rows, env.rows),
      KEY_I(env, cols, env.cols),
      KEY_D(env, cell_size, env.cell_size),
      KEY_U64(env, world_seed, env.world_seed),
      KEY_D(env, human_radius, env.human_radius),
      KEY_D(env, gateway_radius, env.gateway_radius),
      KEY_D(env, robot_speed, env.robot_speed),
      KEY_D(env, interaction_cost, env.interaction_cost),
      KEY_D(env, tick, env.tick),
      KEY_I(env, l_max, env.l_max),
      KEY_I(env, episode_cap, env.episode_cap),
      KEY_I(env, h_min, env.h_min),
      KEY_I(env, h_max, env.h_max),
      KEY_D(env, sigma, env.sigma),
      KEY_I(env, corridor_run, env.corridor_run),
      KEY_D(rewards, r_nointer, rewards.r_nointer),
      KEY_D(rewards, r_wronginter, rewards.r_wronginter),
      KEY_D(rewards, r_reached, rewards.r_reached),
      KEY_D(rewards, r_gmin, rewards.r_gmin),
      KEY_D(rewards, w_n, rewards.w_n),
      KEY_D(rewards, r_follow, rewards.r_follow),
      KEY_D(rewards, w_o, rewards.w_o),
      KEY_D(rewards, r_optimal, rewards.r_optimal),
      KEY_I(rewards, i_min, rewards.i_min),
      KEY_D(train, learning_rate, train.learning_rate),
      KEY_D(train, clip_eps, train.clip_eps),
      KEY_D(train, gamma, train.gamma),
      KEY_D(train, gae_lambda, train.gae_lambda),
      KEY_I(train, epochs_per_update, train.epochs_per_update),
      KEY_I(train, minibatch_size, train.minibatch_size),
      KEY_I(train, horizon, train.horizon),
      KEY_LL(train, total_steps, train.total_steps),
      KEY_D(train, entropy_coef, train.entropy_coef),
      KEY_D(train, value_coef, train.value_coef),
      KEY_U64(train, seed, train.seed),
      KEY_I(train, hidden1, train.hidden1),
      KEY_I(train, hidden2, train.hidden2),
      KEY_S(train, optimizer, train.optimizer),
      KEY_I(train, checkpoint_interval, train.checkpoint_interval),
      KEY_D(affect, a_rep, affect.a_rep),
      KEY_D(affect, a_hes, affect.a_hes),
      KEY_D(affect, a_unc, affect.a_unc),
      KEY_LIST(affect, fillers, affect.fillers),
      KEY_LIST(affect, hedges, affect.hedges),
      KEY_LIST(affect, repair_cues, affect.repair_cues),
  };
  return table;
}

#undef KEY_D
#undef KEY_I
#undef KEY_LL
#undef KEY_U64
#undef KEY_S
#undef KEY_LIST

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

void validate_config(const RunConfig& cfg) {
  const auto& e = cfg.env;
  require(e.rows >= 2, "env.rows", "must be >= 2");
  require(e.cols >= 2, "env.cols", "must be >= 2");
  require(e.cell_size > 0, "env.cell_size", "must be > 0");
  require(e.human_radius > 0, "env.human_radius", "must be > 0");
  require(e.gateway_radius > 0, "env.gateway_radius", "must be > 0");
  require(e.robot_speed > 0, "env.robot_speed", "must be > 0");
  require(e.interaction_cost > 0, "env.interaction_cost", "must be > 0");
  require(e.tick > 0, "env.tick", "must be > 0");
  require(e.l_max >= 1, "env.l_max", "must be >= 1");
  require(e.episode_cap >= 1, "env.episode_cap", "must be >= 1");
  require(e.h_min >= 0, "env.h_min", "must be >= 0");
  require(e.h_max >= e.h_min, "env.h_max", "must be >= env.h_min");
  require(e.sigma >= 0, "env.sigma", "must be >= 0 (0 selects diagonal/3)");
  require(e.corridor_run >= 1, "env.corridor_run", "must be >= 1");

  require(cfg.rewards.i_min >= 0, "rewards.i_min", "must be >= 0");
  require(cfg.rewards.w_n >= 0, "rewards.w_n", "must be >= 0");
  require(cfg.rewards.w_o >= 0, "rewards.w_o", "must be >= 0");

  const auto& t = cfg.train;
  require(t.learning_rate > 0, "train.learning_rate", "must be > 0");
  require(t.clip_eps > 0 && t.clip_eps < 1, "train.clip_eps",
          "must be in (0,1)");
  require(t.gamma > 0 && t.gamma <= 1, "train.gamma", "must be in (0,1]");
  require(t.gae_lambda > 0 && t.gae_lambda <= 1, "train.gae_lambda",
          "must be in (0,1]");
  require(t.epochs_per_update >= 1, "train.epochs_per_update", "must be >= 1");
  require(t.minibatch_size >= 1, "train.minibatch_size", "must be >= 1");
  require(t.horizon >= 1, "train.horizon", "must be >= 1");
  require(t.total_steps >= t.horizon, "train.total_steps",
          "must be >= train.horizon");
  require(t.entropy_coef >= 0, "train.entropy_coef", "must be >= 0");
  require(t.value_coef >= 0, "train.value_coef", "must be >= 0");
  require(t.hidden1 >= 1, "train.hidden1", "must be >= 1");
  require(t.hidden2 >= 1, "train.hidden2", "must be >= 1");
  require(t.optimizer == "adam" || t.optimizer == "sgd", "train.optimizer",
          "must be 'adam' or 'sgd'");
  require(t.checkpoint_interval >= 1, "train.checkpoint_interval",
          "must be >= 1");

  const auto& a = cfg.affect;
  require(a.a_rep > 0 && a.a_rep <= 1, "affect.a_rep", "must be in (0,1]");
  require(a.a_hes > 0 && a.a_hes <= 1, "affect.a_hes", "must be in (0,1]");
  require(a.a_unc > 0 && a.a_unc <= 1, "affect.a_unc", "must be in (0,1]");
  require(!a.fillers.empty(), "affect.fillers", "must not be empty");
  require(!a.hedges.empty(), "affect.hedges", "must not be empty");
  require(!a.repair_cues.empty(), "affect.repair_cues", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "rewards" && section != "train" &&
          section != "affect")
        throw ConfigError("unknown section: [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                        "' appears before any [section]");
    std::string path = section + "." + key;
    bool found = false;
    for (const auto& def : key_table()) {
      if (section == def.section && key == def.key) {
        def.set(cfg, path, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown key: " + path);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& def : key_table()) {
    if (section != def.section) {
      if (!section.empty()) out += "\n";
      section = def.section;
      out += "[" + section + "]\n";
    }
    out += std::string(def.key) + " = " + def.get(cfg) + "\n";
  }
  return out;
}

const std::vector<std::string>& documented_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& def : key_table())
      k.push_back(std::string(def.section) + "." + def.key);
    return k;
  }();
  return keys;
}

}  // namespace trustnav
