#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trustnav/config.hpp"
#include "trustnav/eval.hpp"
#include "trustnav/lang2sym.hpp"
#include "trustnav/ppo.hpp"
#include "trustnav/rng.hpp"

namespace fs = std::filesystem;
using namespace trustnav;

namespace {

RunConfig load_or_default(const std::string& path) {
  if (path.empty()) return default_config();
  return load_config(path);
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.ini");
  out << serialize_config(cfg);
}

int cmd_parse(const std::string& config_path, const std::string& text) {
  RunConfig cfg = load_or_default(config_path);
  lang::SymbolizerOptions opt{cfg.env.l_max, cfg.env.corridor_run};
  lang::ParsedUtterance p = lang::parse_utterance(text, cfg.affect, opt);

  std::cout << "symbols: " << lang::symbols_string(p.guidance.symbols) << "\n";
  std::cout << std::fixed << std::setprecision(4) << "confidences:";
  for (double c : p.guidance.confidences) std::cout << ' ' << c;
  std::cout << "\ntau_h: " << p.guidance.tau_h << "\n";
  if (p.repaired.ignored_span)
    std::cout << "warning: a repair cue had nothing to correct\n";
  if (p.guidance.symbols.empty()) {
    std::cout << "no directional content\n";
    return 1;
  }
  return 0;
}

int cmd_corpus_test(const std::string& config_path, const std::string& file) {
  RunConfig cfg = load_or_default(config_path);
  lang::SymbolizerOptions opt{cfg.env.l_max, cfg.env.corridor_run};
  auto entries = lang::load_corpus(file);
  std::vector<lang::CorpusDiff> diffs;
  double acc = lang::evaluate_corpus(entries, cfg.affect, opt, &diffs);
  std::cout << "entries: " << entries.size() << "\n";
  std::cout << std::fixed << std::setprecision(4) << "accuracy: " << acc
            << "\n";
  for (const auto& d : diffs)
    std::cout << "mismatch #" << d.index << ": \"" << d.text
              << "\" expected [" << d.expected << "] got [" << d.actual
              << "]\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::string& resume) {
  RunConfig cfg = load_or_default(config_path);
  std::optional<fs::path> resume_path;
  if (!resume.empty()) resume_path = resume;
  rl::TrainResult result =
      rl::train(cfg, out_dir, resume_path, [](const rl::UpdateRecord& r) {
        std::cout << "update " << r.update << "  step " << r.step
                  << "  ep_reward " << std::fixed << std::setprecision(2)
                  << r.mean_episode_reward << "  success "
                  << std::setprecision(2) << r.success_rate << "  tau_r "
                  << std::setprecision(3) << r.mean_tau_r << "\n";
      });
  std::cout << "final checkpoint: " << result.final_checkpoint.string()
            << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& policy,
             const std::string& checkpoint, int episodes, std::uint64_t seed,
             const std::string& out_path) {
  RunConfig cfg = load_or_default(config_path);
  eval::PolicyKind kind = eval::policy_kind_from_string(policy);
  std::optional<net::MlpParams> params;
  if (kind == eval::PolicyKind::Learned) {
    if (checkpoint.empty())
      throw std::runtime_error("--checkpoint is required for --policy learned");
    params = rl::load_checkpoint_params(checkpoint);
  }

  std::vector<eval::EpisodeRecord> records;
  eval::EvalReport rep = eval::run_eval(
      cfg, kind, params ? &*params : nullptr, episodes, seed, &records);

  if (!out_path.empty()) {
    fs::path out(out_path);
    if (out.has_parent_path()) echo_config(cfg, out.parent_path());
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    for (std::size_t i = 0; i < records.size(); ++i)
      f << eval::episode_record_json(static_cast<int>(i), records[i]) << "\n";
  }

  std::cout << std::fixed << std::setprecision(4);
  std::cout << "policy: " << policy << "\n"
            << "episodes: " << rep.episodes << "\n"
            << "success_rate: " << rep.success_rate << "\n"
            << "mean_gateways: " << rep.mean_gateways << "\n"
            << "mean_interactions: " << rep.mean_interactions << "\n"
            << "mean_elapsed: " << rep.mean_elapsed << "\n"
            << "mean_reward: " << rep.mean_reward << "\n"
            << "mean_tau_r: " << rep.mean_tau_r << "\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& checkpoint,
                int episodes, std::uint64_t seed, double sigma_high,
                double sigma_low, const std::string& out_path) {
  RunConfig cfg = load_or_default(config_path);
  std::optional<net::MlpParams> params;
  if (!checkpoint.empty()) params = rl::load_checkpoint_params(checkpoint);

  // regime sigmas default relative to the world diagonal
  sim::WorldMap world = sim::generate_world(cfg.env.rows, cfg.env.cols,
                                            cfg.env.cell_size,
                                            cfg.env.world_seed);
  if (sigma_high <= 0) sigma_high = world.diagonal() * 3.0;
  if (sigma_low <= 0) sigma_low = world.diagonal() / 8.0;

  auto grid = eval::compare_regimes(
      cfg, params ? &*params : nullptr,
      {{"high_trust", sigma_high}, {"low_trust", sigma_low}}, episodes, seed);
  std::string csv = eval::grid_csv(grid);

  if (!out_path.empty()) {
    fs::path out(out_path);
    if (out.has_parent_path()) echo_config(cfg, out.parent_path());
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << csv;
  }
  std::cout << csv;
  return 0;
}

int cmd_demo_repl(const std::string& config_path, const std::string& checkpoint,
                  std::uint64_t seed, const std::string& transcript_path) {
  RunConfig cfg = load_or_default(config_path);
  net::MlpParams params = rl::load_checkpoint_params(checkpoint);
  std::ofstream transcript;
  if (!transcript_path.empty()) transcript.open(transcript_path);
  eval::demo_repl(std::cin, std::cout, cfg, params, seed,
                  transcript.is_open() ? &transcript : nullptr);
  return 0;
}

int cmd_dump_world(const std::string& config_path, const std::string& out_path) {
  RunConfig cfg = load_or_default(config_path);
  sim::WorldMap world = sim::generate_world(cfg.env.rows, cfg.env.cols,
                                            cfg.env.cell_size,
                                            cfg.env.world_seed);
  std::string dump = sim::dump_world(world);
  if (out_path.empty()) {
    std::cout << dump;
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << dump;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trust-driven language-guided navigation lab"};
  app.require_subcommand(1);

  std::string config_path, text, file, out, checkpoint, resume, policy,
      transcript;
  int episodes = 200;
  std::uint64_t seed = 0;
  double sigma_high = 0, sigma_low = 0;

  auto* parse = app.add_subcommand("parse", "symbolize one utterance");
  parse->add_option("--config", config_path, "config file");
  parse->add_option("--text", text, "guidance utterance")->required();

  auto* corpus = app.add_subcommand("corpus-test", "score a corpus file");
  corpus->add_option("--config", config_path, "config file");
  corpus->add_option("--file", file, "corpus JSONL file")->required();

  auto* train = app.add_subcommand("train", "train the policy");
  train->add_option("--config", config_path, "config file");
  train->add_option("--out", out, "output directory")->required();
  train->add_option("--resume", resume, "checkpoint to resume from");

  auto* ev = app.add_subcommand("eval", "evaluate a policy");
  ev->add_option("--config", config_path, "config file");
  ev->add_option("--policy", policy, "learned|random|gullible|skeptical")
      ->required();
  ev->add_option("--checkpoint", checkpoint, "checkpoint for learned policy");
  ev->add_option("--episodes", episodes, "episode count");
  ev->add_option("--seed", seed, "evaluation seed");
  ev->add_option("--out", out, "report JSONL path");

  auto* cmp = app.add_subcommand("compare", "policy x regime grid");
  cmp->add_option("--config", config_path, "config file");
  cmp->add_option("--checkpoint", checkpoint, "learned policy checkpoint");
  cmp->add_option("--episodes", episodes, "episodes per cell");
  cmp->add_option("--seed", seed, "evaluation seed");
  cmp->add_option("--sigma-high", sigma_high, "high-trust regime sigma");
  cmp->add_option("--sigma-low", sigma_low, "low-trust regime sigma");
  cmp->add_option("--out", out, "grid CSV path");

  auto* repl = app.add_subcommand("demo-repl", "interactive guidance session");
  repl->add_option("--config", config_path, "config file");
  repl->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();
  repl->add_option("--seed", seed, "episode seed");
  repl->add_option("--transcript", transcript, "session transcript path");

  auto* dump = app.add_subcommand("dump-world", "emit the gateway graph");
  dump->add_option("--config", config_path, "config file");
  dump->add_option("--out", out, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) return cmd_parse(config_path, text);
    if (corpus->parsed()) return cmd_corpus_test(config_path, file);
    if (train->parsed()) return cmd_train(config_path, out, resume);
    if (ev->parsed())
      return cmd_eval(config_path, policy, checkpoint, episodes, seed, out);
    if (cmp->parsed())
      return cmd_compare(config_path, checkpoint, episodes, seed, sigma_high,
                         sigma_low, out);
    if (repl->parsed())
      return cmd_demo_repl(config_path, checkpoint, seed, transcript);
    if (dump->parsed()) return cmd_dump_world(config_path, out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
