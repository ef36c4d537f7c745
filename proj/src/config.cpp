#include "hrl/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "hrl/errors.hpp"

namespace hrl::harness {

namespace {

using nlohmann::json;
using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

long as_int(const json& v, const std::string& key) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long>(d))) return static_cast<long>(d);
  }
  throw ConfigError(key, "expected an integer");
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

template <typename F>
auto with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (!e.key().empty()) throw;
    throw ConfigError(key, e.what());
  }
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"env.reward_mode",
       [](RunConfig& c, const json& v, const std::string& k) {
         c.reward_mode = with_key(k, [&] { return envs::parse_reward_mode(as_string(v, k)); });
       }},
      {"env.noise_sigma", [](RunConfig& c, const json& v, const std::string& k) { c.noise_sigma = as_real(v, k); }},
      {"brhpo.k", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.k = static_cast<int>(as_int(v, k)); }},
      {"brhpo.lambda1", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.lambda1 = as_real(v, k); }},
      {"brhpo.lambda2", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.lambda2 = as_real(v, k); }},
      {"brhpo.metric",
       [](RunConfig& c, const json& v, const std::string& k) {
         c.brhpo.metric = with_key(k, [&] { return envs::parse_metric(as_string(v, k)); });
       }},
      {"brhpo.variant",
       [](RunConfig& c, const json& v, const std::string& k) {
         c.brhpo.variant = with_key(k, [&] { return brhpo::parse_variant(as_string(v, k)); });
       }},
      {"brhpo.reach_clip", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.reach_clip = as_real(v, k); }},
      {"brhpo.eps_denom", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.eps_denom = as_real(v, k); }},
      {"brhpo.subgoal_range", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.subgoal_range = as_real(v, k); }},
      {"sac.gamma", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.gamma = as_real(v, k); }},
      {"sac.tau", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.tau = as_real(v, k); }},
      {"sac.critic_lr", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.critic_lr = as_real(v, k); }},
      {"sac.actor_lr", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.actor_lr = as_real(v, k); }},
      {"sac.alpha", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.alpha = as_real(v, k); }},
      {"sac.batch_size", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.batch_size = static_cast<int>(as_int(v, k)); }},
      {"sac.updates_per_step", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.updates_per_step = static_cast<int>(as_int(v, k)); }},
      {"sac.target_update_interval", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.target_update_interval = static_cast<int>(as_int(v, k)); }},
      {"sac.high_buffer", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.high_buffer = as_int(v, k); }},
      {"sac.low_buffer", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.low_buffer = as_int(v, k); }},
      {"sac.start_steps", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.start_steps = as_int(v, k); }},
      {"sac.reward_scale", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.reward_scale = as_real(v, k); }},
      {"sac.grad_clip", [](RunConfig& c, const json& v, const std::string& k) { c.brhpo.sac.grad_clip = as_real(v, k); }},
      {"sac.hidden",
       [](RunConfig& c, const json& v, const std::string& k) {
         if (!v.is_array() || v.empty()) throw ConfigError(k, "expected a non-empty array of widths");
         std::vector<int> h;
         for (const auto& w : v) h.push_back(static_cast<int>(as_int(w, k)));
         c.brhpo.sac.hidden = h;
       }},
      {"sac.high_discount",
       [](RunConfig& c, const json& v, const std::string& k) {
         const std::string s = as_string(v, k);
         if (s == "gamma") {
           c.brhpo.sac.high_discount = brhpo::HighDiscount::Gamma;
         } else if (s == "gamma_pow_k") {
           c.brhpo.sac.high_discount = brhpo::HighDiscount::GammaPowK;
         } else {
           throw ConfigError(k, "expected 'gamma' or 'gamma_pow_k'");
         }
       }},
      {"run.total_steps", [](RunConfig& c, const json& v, const std::string& k) { c.total_steps = as_int(v, k); }},
      {"run.eval_interval", [](RunConfig& c, const json& v, const std::string& k) { c.eval_interval = as_int(v, k); }},
      {"run.eval_episodes", [](RunConfig& c, const json& v, const std::string& k) { c.eval_episodes = static_cast<int>(as_int(v, k)); }},
      {"run.checkpoint_interval", [](RunConfig& c, const json& v, const std::string& k) { c.checkpoint_interval = as_int(v, k); }},
      {"run.seed",
       [](RunConfig& c, const json& v, const std::string& k) {
         const long s = as_int(v, k);
         if (s < 0) throw ConfigError(k, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.output_dir", [](RunConfig& c, const json& v, const std::string& k) { c.output_dir = as_string(v, k); }},
  };
  return table;
}

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

envs::EnvSpec RunConfig::env_spec() const { return envs::make_env(env, reward_mode, noise_sigma); }

RunConfig default_run_config(envs::EnvName env) {
  RunConfig c;
  c.env = env;
  c.brhpo = brhpo::default_config(env);
  if (env == envs::EnvName::PointSparse) {
    c.reward_mode = envs::RewardMode::Sparse;
    c.total_steps = 100000;
  }
  return c;
}

RunConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  envs::EnvName name = envs::EnvName::PointMaze;
  if (doc.contains("env.name")) {
    name = envs::parse_env_name(as_string(doc.at("env.name"), "env.name"));
  }
  RunConfig cfg = default_run_config(name);
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    if (key == "env.name") continue;
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown configuration key");
    it->second(cfg, value, key);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", "malformed JSON in " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void validate(const RunConfig& c) {
  const auto& b = c.brhpo;
  const auto& s = b.sac;
  check(c.noise_sigma >= 0.0, "env.noise_sigma", "must be >= 0");
  check(b.k >= 1, "brhpo.k", "must be a positive integer");
  check(b.lambda1 >= 0.0, "brhpo.lambda1", "must be >= 0");
  check(b.lambda2 >= 0.0, "brhpo.lambda2", "must be >= 0");
  check(b.reach_clip > 0.0, "brhpo.reach_clip", "must be > 0");
  check(b.eps_denom > 0.0, "brhpo.eps_denom", "must be > 0");
  check(s.gamma > 0.0 && s.gamma < 1.0, "sac.gamma", "must lie in (0, 1)");
  check(s.tau > 0.0 && s.tau <= 1.0, "sac.tau", "must lie in (0, 1]");
  check(s.critic_lr > 0.0, "sac.critic_lr", "must be > 0");
  check(s.actor_lr > 0.0, "sac.actor_lr", "must be > 0");
  check(s.alpha >= 0.0, "sac.alpha", "must be >= 0");
  check(s.batch_size >= 1, "sac.batch_size", "must be >= 1");
  check(s.updates_per_step >= 1, "sac.updates_per_step", "must be >= 1");
  check(s.target_update_interval >= 1, "sac.target_update_interval", "must be >= 1");
  check(s.high_buffer >= s.batch_size, "sac.high_buffer", "must hold at least one batch");
  check(s.low_buffer >= s.batch_size, "sac.low_buffer", "must hold at least one batch");
  check(s.start_steps >= s.batch_size, "sac.batch_size", "must not exceed sac.start_steps (the warm-up)");
  check(s.reward_scale > 0.0, "sac.reward_scale", "must be > 0");
  check(s.grad_clip > 0.0, "sac.grad_clip", "must be > 0");
  for (int w : s.hidden) check(w >= 1, "sac.hidden", "widths must be positive");
  check(c.total_steps >= 1, "run.total_steps", "must be >= 1");
  check(c.eval_interval >= 1, "run.eval_interval", "must be >= 1");
  check(c.eval_episodes >= 1, "run.eval_episodes", "must be >= 1");
  check(c.checkpoint_interval >= 0, "run.checkpoint_interval", "must be >= 0");
  const envs::EnvSpec env = c.env_spec();
  check(env.episode_len > b.k, "brhpo.k", "must be shorter than the episode");
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& b = c.brhpo;
  const auto& s = b.sac;
  return {
      {"env.name", envs::to_string(c.env)},
      {"env.reward_mode", envs::to_string(c.reward_mode)},
      {"env.noise_sigma", c.noise_sigma},
      {"brhpo.k", b.k},
      {"brhpo.lambda1", b.lambda1},
      {"brhpo.lambda2", b.lambda2},
      {"brhpo.metric", envs::to_string(b.metric)},
      {"brhpo.variant", brhpo::to_string(b.variant)},
      {"brhpo.reach_clip", b.reach_clip},
      {"brhpo.eps_denom", b.eps_denom},
      {"brhpo.subgoal_range", b.subgoal_range},
      {"sac.gamma", s.gamma},
      {"sac.tau", s.tau},
      {"sac.critic_lr", s.critic_lr},
      {"sac.actor_lr", s.actor_lr},
      {"sac.alpha", s.alpha},
      {"sac.batch_size", s.batch_size},
      {"sac.updates_per_step", s.updates_per_step},
      {"sac.target_update_interval", s.target_update_interval},
      {"sac.high_buffer", s.high_buffer},
      {"sac.low_buffer", s.low_buffer},
      {"sac.start_steps", s.start_steps},
      {"sac.reward_scale", s.reward_scale},
      {"sac.hidden", s.hidden},
      {"sac.grad_clip", s.grad_clip},
      {"sac.high_discount", s.high_discount == brhpo::HighDiscount::Gamma ? "gamma" : "gamma_pow_k"},
      {"run.total_steps", c.total_steps},
      {"run.eval_interval", c.eval_interval},
      {"run.eval_episodes", c.eval_episodes},
      {"run.checkpoint_interval", c.checkpoint_interval},
      {"run.seed", c.seed},
      {"run.output_dir", c.output_dir},
  };
}

}  // namespace hrl::harness
