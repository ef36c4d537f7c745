#include "hrl/runner.hpp"

#include <fstream>

#include "hrl/checkpoint.hpp"
#include "hrl/errors.hpp"

namespace hrl::harness {

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

void save_checkpoint(const brhpo::HierAgent& agent, const RunConfig& cfg, long env_step,
                     const std::filesystem::path& dir) {
  nlohmann::json meta = {{"config", to_json(cfg)}, {"env_step", env_step}, {"seed", cfg.seed}};
  netopt::save_bundle(dir, agent.networks(), meta);
}

std::unique_ptr<brhpo::HierAgent> load_checkpoint(const std::filesystem::path& dir,
                                                  RunConfig* cfg_out) {
  nlohmann::json meta;
  const auto nets = netopt::load_bundle(dir, &meta);
  if (!meta.contains("config")) throw IoError("checkpoint manifest has no config metadata");
  const RunConfig cfg = config_from_json(meta.at("config"));
  auto agent = std::make_unique<brhpo::HierAgent>(cfg.brhpo, cfg.env_spec(), cfg.seed);
  agent->load_networks(nets);
  if (cfg_out) *cfg_out = cfg;
  return agent;
}

RunOutcome execute_run(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  write_json(out_dir / "config.json", to_json(cfg));
  const auto csv = out_dir / "metrics.csv";
  std::filesystem::remove(csv, ec);
  CsvSink sink(csv);

  brhpo::TrainingOptions opts;
  opts.total_steps = cfg.total_steps;
  opts.eval_interval = cfg.eval_interval;
  opts.eval_episodes = cfg.eval_episodes;
  opts.checkpoint_interval = cfg.checkpoint_interval;
  opts.on_checkpoint = [&](const brhpo::HierAgent& agent, long step) {
    const bool final = step >= cfg.total_steps;
    const auto dir = out_dir / "checkpoints" / (final ? std::string("final") : "step_" + std::to_string(step));
    save_checkpoint(agent, cfg, step, dir);
  };

  brhpo::TrainingResult result = brhpo::run_training(cfg.brhpo, cfg.env_spec(), cfg.seed, opts, &sink);
  const auto& s = result.summary;
  write_json(out_dir / "summary.json",
             {{"env_steps", s.env_steps},
              {"episodes", s.episodes},
              {"final_success_rate", s.final_success_rate},
              {"final_mean_reachability", s.final_mean_reachability},
              {"aborted", s.aborted},
              {"diagnostic", s.diagnostic},
              {"low_updates", s.low_updates},
              {"high_updates", s.high_updates}});
  return {result.summary, out_dir};
}

}  // namespace hrl::harness
