#include "hrl/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "hrl/errors.hpp"
#include "hrl/evaluate.hpp"
#include "hrl/gradcheck_suite.hpp"
#include "hrl/runner.hpp"
#include "hrl/theorem.hpp"

namespace hrl::harness {

namespace {

using nlohmann::json;

void diagnose(std::ostream& err, const std::string& code, const std::string& message,
              const json& extra = json::object()) {
  json d = {{"level", "error"}, {"code", code}, {"message", message}};
  d.update(extra);
  err << d.dump() << '\n';
}

struct RunFlags {
  std::string config;
  std::string env;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "runs/latest";
  long total_steps = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config with flat dotted keys");
  cmd->add_option("--env", f.env, "PointMaze, PointBigMaze or PointSparse (when no config)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&f](std::uint64_t s) { f.seed = s; f.seed_set = true; }, "run seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--total-steps", f.total_steps, "override run.total_steps");
}

RunConfig resolve(const RunFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = parse_config(f.config);
    if (!f.env.empty() && envs::parse_env_name(f.env) != cfg.env) {
      throw ConfigError("env.name", "--env disagrees with the config file");
    }
  } else {
    cfg = default_run_config(f.env.empty() ? envs::EnvName::PointMaze : envs::parse_env_name(f.env));
  }
  if (f.seed_set) cfg.seed = f.seed;
  if (f.total_steps > 0) cfg.total_steps = f.total_steps;
  cfg.output_dir = f.out;
  validate(cfg);
  return cfg;
}

json summary_json(const brhpo::RunSummary& s) {
  return {{"env_steps", s.env_steps},
          {"episodes", s.episodes},
          {"final_success_rate", s.final_success_rate},
          {"final_mean_reachability", s.final_mean_reachability},
          {"aborted", s.aborted}};
}

int train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const RunOutcome r = execute_run(cfg, cfg.output_dir);
  if (r.summary.aborted) {
    diagnose(err, "E_NUMERIC", r.summary.diagnostic, {{"out", cfg.output_dir}});
    return kExitNumeric;
  }
  json j = summary_json(r.summary);
  j["out"] = cfg.output_dir;
  out << j.dump() << '\n';
  return kExitOk;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> v;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) v.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) v.push_back(cur);
  return v;
}

RunConfig with_param(RunConfig cfg, const std::string& param, const std::string& value) {
  json patch = to_json(cfg);
  const std::string key = "brhpo." + param;
  try {
    if (param == "metric") {
      patch[key] = value;
    } else if (param == "k") {
      patch[key] = std::stoi(value);
    } else {
      patch[key] = std::stod(value);
    }
  } catch (const std::logic_error&) {
    throw ConfigError(key, "cannot parse sweep value '" + value + "'");
  }
  return config_from_json(patch);
}

int sweep(const RunFlags& f, const std::string& param, const std::string& values, int seeds,
          int jobs, std::ostream& out, std::ostream& err) {
  const RunConfig base = resolve(f);
  const auto vals = split_values(values);
  if (vals.empty()) throw ConfigError("--values", "no sweep values given");
  struct Job {
    RunConfig cfg;
    std::string value;
  };
  std::vector<Job> queue;
  for (const auto& v : vals) {
    for (int s = 0; s < seeds; ++s) {
      RunConfig c = with_param(base, param, v);
      c.seed = base.seed + static_cast<std::uint64_t>(s);
      c.output_dir = (std::filesystem::path(base.output_dir) / (param + "_" + v) /
                      ("seed_" + std::to_string(c.seed))).string();
      queue.push_back({c, v});
    }
  }
  std::vector<json> results(queue.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  bool failed = false;
  const auto worker = [&] {
    for (std::size_t i = next++; i < queue.size(); i = next++) {
      try {
        const RunOutcome r = execute_run(queue[i].cfg, queue[i].cfg.output_dir);
        json j = summary_json(r.summary);
        j["param"] = param;
        j["value"] = queue[i].value;
        j["seed"] = queue[i].cfg.seed;
        j["out"] = queue[i].cfg.output_dir;
        results[i] = j;
        if (r.summary.aborted) {
          std::lock_guard lock(err_mu);
          diagnose(err, "E_NUMERIC", r.summary.diagnostic, {{"out", queue[i].cfg.output_dir}});
          failed = true;
        }
      } catch (const Error& e) {
        std::lock_guard lock(err_mu);
        diagnose(err, e.code(), e.what(), {{"out", queue[i].cfg.output_dir}});
        failed = true;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(queue.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json by_value = json::object();
  for (const auto& v : vals) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : results) {
      if (!r.is_null() && r["value"] == v) {
        sum += r["final_success_rate"].get<double>();
        ++n;
      }
    }
    by_value[v] = n > 0 ? sum / n : 0.0;
  }
  out << json{{"runs", results}, {"mean_final_success_rate", by_value}}.dump(2) << '\n';
  return failed ? kExitNumeric : kExitOk;
}

int verify_theory(int instances, std::uint64_t seed, const std::string& tier, std::ostream& out) {
  oracle::InstanceParams p;
  std::vector<oracle::TheoremReport> reports;
  if (tier == "a" || tier == "both") reports.push_back(oracle::verify_theorem1(oracle::Tier::A, p, instances, seed));
  if (tier == "b" || tier == "both") reports.push_back(oracle::verify_theorem1(oracle::Tier::B, p, instances, seed));
  int tier_a_violations = 0;
  json docs = json::array();
  for (const auto& r : reports) {
    docs.push_back(oracle::to_json(r));
    if (r.tier == oracle::Tier::A) tier_a_violations += r.violations;
  }
  out << (docs.size() == 1 ? docs[0] : docs).dump(2) << '\n';
  return tier_a_violations == 0 ? kExitOk : kExitCheckFailed;
}

int gradcheck(int configs, std::uint64_t seed, std::ostream& out) {
  const GradcheckReport rep = run_gradcheck_suite(configs, seed);
  json cases = json::array();
  for (const auto& c : rep.cases) {
    cases.push_back({{"name", c.name}, {"config", c.config}, {"max_rel_error", c.max_rel_error}});
  }
  const bool pass = rep.max_rel_error < 1e-4;
  out << json{{"max_rel_error", rep.max_rel_error}, {"threshold", 1e-4}, {"pass", pass}, {"cases", cases}}.dump(2)
      << '\n';
  return pass ? kExitOk : kExitCheckFailed;
}

int eval(const std::string& checkpoint, int episodes, std::uint64_t seed, std::ostream& out) {
  RunConfig cfg;
  auto agent = load_checkpoint(checkpoint, &cfg);
  Rng rng = Rng::substream(seed, "eval");
  const EvalResult r = evaluate(*agent, cfg.env_spec(), episodes, cfg.brhpo.k, cfg.brhpo.metric, rng);
  out << json{{"episodes", r.episodes},
              {"success_rate", r.success_rate},
              {"mean_return", r.mean_return},
              {"mean_reachability", r.mean_reachability}}
             .dump()
      << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-level hierarchical RL with bidirectional subgoal reachability"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train one run");
  add_run_flags(train_cmd, train_flags);

  RunFlags ablate_flags;
  std::string variant;
  auto* ablate_cmd = app.add_subcommand("ablate", "train one run with a forced variant");
  add_run_flags(ablate_cmd, ablate_flags);
  ablate_cmd->add_option("--variant", variant, "vanilla, noreg, nobonus or full")
      ->required()
      ->check(CLI::IsMember({"vanilla", "noreg", "nobonus", "full"}));

  RunFlags sweep_flags;
  std::string param;
  std::string values;
  int seeds = 1;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "train over a grid of one parameter");
  add_run_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", param, "lambda1, lambda2, metric or k")
      ->required()
      ->check(CLI::IsMember({"lambda1", "lambda2", "metric", "k"}));
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds", seeds, "seeds per value (consecutive from --seed)")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  int instances = 50;
  std::uint64_t theory_seed = 0;
  std::string tier = "both";
  auto* theory_cmd = app.add_subcommand("verify-theory", "tabular bound sweep");
  theory_cmd->add_option("--instances", instances)->check(CLI::PositiveNumber);
  theory_cmd->add_option("--seed", theory_seed);
  theory_cmd->add_option("--tier", tier)->check(CLI::IsMember({"a", "b", "both"}));

  int configs = 20;
  std::uint64_t grad_seed = 0;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  grad_cmd->add_option("--configs", configs)->check(CLI::PositiveNumber);
  grad_cmd->add_option("--seed", grad_seed);

  std::string checkpoint;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << '\n';
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All) << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    diagnose(err, "E_USAGE", e.what());
    return kExitUsage;
  }

  try {
    if (*train_cmd) return train(resolve(train_flags), out, err);
    if (*ablate_cmd) {
      RunConfig cfg = resolve(ablate_flags);
      cfg.brhpo.variant = brhpo::parse_variant(variant);
      return train(cfg, out, err);
    }
    if (*sweep_cmd) return sweep(sweep_flags, param, values, seeds, jobs, out, err);
    if (*theory_cmd) return verify_theory(instances, theory_seed, tier, out);
    if (*grad_cmd) return gradcheck(configs, grad_seed, out);
    if (*eval_cmd) return eval(checkpoint, episodes, eval_seed, out);
  } catch (const ConfigError& e) {
    diagnose(err, e.code(), e.what(), {{"key", e.key()}});
    return kExitConfig;
  } catch (const IoError& e) {
    diagnose(err, e.code(), e.what());
    return kExitIo;
  } catch (const NumericalError& e) {
    diagnose(err, e.code(), e.what(), {{"index", e.index()}});
    return kExitNumeric;
  } catch (const ContractViolation& e) {
    diagnose(err, e.code(), e.what());
    return kExitContract;
  } catch (const Error& e) {
    // Malformed checkpoints and other unreadable inputs.
    diagnose(err, e.code(), e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    diagnose(err, "E_INTERNAL", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace hrl::harness
