#include "vismax/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vismax {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

ConfigError::ConfigError(const std::string& source, const std::string& what)
    : std::runtime_error(source + ": " + what), source_(source) {}

std::string to_string(Mode m) { return m == Mode::Explore ? "explore" : "control"; }
std::string to_string(Estimator e) { return e == Estimator::Exact ? "exact" : "mc"; }

namespace {

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return {b, e};
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool as_bool(const std::string& v) {
  const std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::uint64_t as_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t as_count(const std::string& v) { return static_cast<std::size_t>(as_u64(v)); }

int as_int(const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

double as_real(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out))
    throw std::invalid_argument("expected a finite real, got '" + v + "'");
  return out;
}

std::vector<std::uint64_t> as_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(v)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(as_u64(item));
      continue;
    }
    const std::uint64_t lo = as_u64(trim(item.substr(0, dots)));
    const std::uint64_t hi = as_u64(trim(item.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("empty seed range '" + item + "'");
    if (hi - lo > 100000) throw std::invalid_argument("seed range too large '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("seed list is empty");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"layout", [](RunConfig& c, const std::string& v) { c.layout.name = v; }},
      {"layout.map", [](RunConfig& c, const std::string& v) { c.layout.map = v; }},
      {"layout.random_start", [](RunConfig& c, const std::string& v) { c.layout.random_start = as_bool(v); }},
      {"layout.goal", [](RunConfig& c, const std::string& v) { c.layout.goal = as_bool(v); }},
      {"layout.width", [](RunConfig& c, const std::string& v) { c.layout.width = as_int(v); }},
      {"layout.height", [](RunConfig& c, const std::string& v) { c.layout.height = as_int(v); }},
      {"strategy",
       [](RunConfig& c, const std::string& v) {
         c.strategies.clear();
         for (const auto& s : split_list(v)) c.strategies.push_back(parse_strategy(s));
         if (c.strategies.empty()) throw std::invalid_argument("strategy list is empty");
       }},
      {"mode",
       [](RunConfig& c, const std::string& v) {
         const std::string l = lower(v);
         if (l == "explore") c.mode = Mode::Explore;
         else if (l == "control") c.mode = Mode::Control;
         else throw std::invalid_argument("mode must be explore or control, got '" + v + "'");
       }},
      {"seeds", [](RunConfig& c, const std::string& v) { c.seeds = as_seeds(v); }},
      {"iterations", [](RunConfig& c, const std::string& v) { c.iterations = as_count(v); }},
      {"eval_interval", [](RunConfig& c, const std::string& v) { c.eval_interval = as_count(v); }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"checkpoint", [](RunConfig& c, const std::string& v) { c.checkpoint = as_bool(v); }},
      {"sac.lambda_sac", [](RunConfig& c, const std::string& v) { c.sac.lambda_sac = as_real(v); }},
      {"sac.gamma", [](RunConfig& c, const std::string& v) { c.sac.gamma = as_real(v); }},
      {"sac.polyak_tau", [](RunConfig& c, const std::string& v) { c.sac.polyak_tau = as_real(v); }},
      {"sac.critic_lr", [](RunConfig& c, const std::string& v) { c.sac.critic_lr = as_real(v); }},
      {"sac.actor_lr", [](RunConfig& c, const std::string& v) { c.sac.actor_lr = as_real(v); }},
      {"sac.batch_size", [](RunConfig& c, const std::string& v) { c.sac.batch_size = as_count(v); }},
      {"sac.critic_updates_per_iter",
       [](RunConfig& c, const std::string& v) { c.sac.critic_updates_per_iter = as_count(v); }},
      {"sac.visitation_updates_per_iter",
       [](RunConfig& c, const std::string& v) { c.sac.visitation_updates_per_iter = as_count(v); }},
      {"sac.actor_centering", [](RunConfig& c, const std::string& v) { c.sac.actor_centering = parse_actor_centering(v); }},
      {"sac.env_steps_per_iter", [](RunConfig& c, const std::string& v) { c.sac.env_steps_per_iter = as_count(v); }},
      {"sac.horizon", [](RunConfig& c, const std::string& v) { c.sac.horizon = as_count(v); }},
      {"sac.n_step", [](RunConfig& c, const std::string& v) { c.sac.n_step = as_count(v); }},
      {"sac.buffer_capacity", [](RunConfig& c, const std::string& v) { c.sac.buffer_capacity = as_count(v); }},
      {"sac.critic_init", [](RunConfig& c, const std::string& v) { c.sac.critic_init = as_real(v); }},
      {"sac.warmup_steps", [](RunConfig& c, const std::string& v) { c.sac.warmup_steps = as_count(v); }},
      {"visitation.gamma_prime", [](RunConfig& c, const std::string& v) { c.visitation.gamma_prime = as_real(v); }},
      {"visitation.learning_rate",
       [](RunConfig& c, const std::string& v) { c.visitation.learning_rate = as_real(v); }},
      {"visitation.batch_size", [](RunConfig& c, const std::string& v) { c.visitation.batch_size = as_count(v); }},
      {"visitation.polyak_tau", [](RunConfig& c, const std::string& v) { c.visitation.polyak_tau = as_real(v); }},
      {"visitation.weight_clip", [](RunConfig& c, const std::string& v) { c.visitation.weight_clip = as_real(v); }},
      {"visitation.exact_policy_ratio",
       [](RunConfig& c, const std::string& v) { c.visitation.exact_policy_ratio = as_bool(v); }},
      {"reward.lambda", [](RunConfig& c, const std::string& v) { c.reward.lambda = as_real(v); }},
      {"reward.lambda_r", [](RunConfig& c, const std::string& v) { c.reward.lambda_r = as_real(v); }},
      {"reward.clip_min", [](RunConfig& c, const std::string& v) { c.reward.clip_min = as_real(v); }},
      {"reward.clip_max", [](RunConfig& c, const std::string& v) { c.reward.clip_max = as_real(v); }},
      {"reward.mv_decay", [](RunConfig& c, const std::string& v) { c.mv_decay = as_real(v); }},
      {"reward.qstar",
       [](RunConfig&, const std::string& v) {
         if (lower(v) != "uniform") throw std::invalid_argument("only 'uniform' is supported for reward.qstar");
       }},
      {"metrics.estimator",
       [](RunConfig& c, const std::string& v) {
         const std::string l = lower(v);
         if (l == "exact") c.metrics.estimator = Estimator::Exact;
         else if (l == "mc") c.metrics.estimator = Estimator::MonteCarlo;
         else throw std::invalid_argument("metrics.estimator must be exact or mc, got '" + v + "'");
       }},
      {"metrics.mc_episodes", [](RunConfig& c, const std::string& v) { c.metrics.mc_episodes = as_count(v); }},
      {"metrics.mc_horizon", [](RunConfig& c, const std::string& v) { c.metrics.mc_horizon = as_count(v); }},
  };
  return table;
}

// Shortest text that parses back to the same double.
std::string fmt_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

std::vector<ConfigEntry> parse_config_entries(std::istream& is, const std::string& source) {
  std::vector<ConfigEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value', got '" + line + "'");
    ConfigEntry e{lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)), source, lineno};
    if (e.key.empty()) throw ConfigError(source, lineno, "empty key");
    out.push_back(std::move(e));
  }
  return out;
}

ConfigEntry parse_override(const std::string& assignment, std::size_t index) {
  const std::string source = "--set";
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(source, index, "expected key=value, got '" + assignment + "'");
  ConfigEntry e{lower(trim(assignment.substr(0, eq))), trim(assignment.substr(eq + 1)), source, index};
  if (e.key.empty()) throw ConfigError(source, index, "empty key");
  return e;
}

RunConfig build_config(const std::vector<ConfigEntry>& entries) {
  RunConfig cfg;
  const ConfigEntry* lambda_r_entry = nullptr;
  for (const auto& e : entries) {
    const auto it = setters().find(e.key);
    if (it == setters().end()) throw ConfigError(e.source, e.line, "unknown key '" + e.key + "'");
    try {
      it->second(cfg, e.value);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(e.source, e.line, e.key + ": " + ex.what());
    }
    if (e.key == "reward.lambda_r") lambda_r_entry = &e;
  }

  if (cfg.mode == Mode::Explore) {
    if (lambda_r_entry != nullptr && cfg.reward.lambda_r != 0.0)
      throw ConfigError(lambda_r_entry->source, lambda_r_entry->line,
                        "reward.lambda_r must be 0 in explore mode (intrinsic rewards only)");
    cfg.reward.lambda_r = 0.0;
  } else {
    if (lambda_r_entry == nullptr) cfg.reward.lambda_r = 1.0;
    if (!(cfg.reward.lambda_r > 0.0)) {
      if (lambda_r_entry != nullptr)
        throw ConfigError(lambda_r_entry->source, lambda_r_entry->line, "reward.lambda_r must be positive in control mode");
      throw ConfigError("config", "reward.lambda_r must be positive in control mode");
    }
  }

  cfg.visitation.gamma = cfg.sac.gamma;
  cfg.visitation.n_step = cfg.sac.n_step;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& ex) {
    const std::string source = entries.empty() ? std::string("config") : entries.front().source;
    throw ConfigError(source, ex.what());
  }
  return cfg;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  std::istringstream is(text);
  auto entries = parse_config_entries(is, "config");
  for (std::size_t i = 0; i < overrides.size(); ++i) entries.push_back(parse_override(overrides[i], i + 1));
  return build_config(entries);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "cannot open config file");
  auto entries = parse_config_entries(is, path);
  for (std::size_t i = 0; i < overrides.size(); ++i) entries.push_back(parse_override(overrides[i], i + 1));
  return build_config(entries);
}

GridSpec RunConfig::grid_spec() const {
  const bool with_goal = layout.goal.value_or(mode == Mode::Control);
  GridSpec spec;
  if (!layout.map.empty()) {
    spec = parse_grid_map(layout.map, layout.name.empty() ? "custom" : layout.name);
    if (!with_goal) spec.goal.reset();
    if (layout.random_start.value_or(false)) spec.start.reset();
    return spec;
  }
  LayoutOptions opts;
  opts.random_start = layout.random_start.value_or(false);
  opts.with_goal = with_goal;
  opts.width = layout.width;
  opts.height = layout.height;
  return make_layout(layout.name, opts);
}

std::string RunConfig::layout_label() const { return grid_spec().layout_name; }

std::size_t RunConfig::mc_horizon() const {
  if (metrics.mc_horizon > 0) return metrics.mc_horizon;
  if (sac.gamma <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(sac.gamma))) + 1;
}

void RunConfig::validate() const {
  if (strategies.empty()) throw std::invalid_argument("at least one strategy is required");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (eval_interval == 0) throw std::invalid_argument("eval_interval must be positive");
  if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
  try {
    sac.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("sac: ") + e.what());
  }
  try {
    visitation.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("visitation: ") + e.what());
  }
  if (visitation.gamma != sac.gamma || visitation.n_step != sac.n_step)
    throw std::invalid_argument("visitation gamma and n_step must match the agent");
  if (!(reward.clip_min <= reward.clip_max)) throw std::invalid_argument("reward.clip_min exceeds reward.clip_max");
  if (!(reward.lambda >= 0.0)) throw std::invalid_argument("reward.lambda must be non-negative");
  if (!(mv_decay >= 0.0 && mv_decay <= 1.0)) throw std::invalid_argument("reward.mv_decay must lie in [0, 1]");
  if (mode == Mode::Explore && reward.lambda_r != 0.0)
    throw std::invalid_argument("reward.lambda_r must be 0 in explore mode");
  if (mode == Mode::Control && !(reward.lambda_r > 0.0))
    throw std::invalid_argument("reward.lambda_r must be positive in control mode");
  if (metrics.estimator == Estimator::MonteCarlo && metrics.mc_episodes < 2)
    throw std::invalid_argument("metrics.mc_episodes must be at least 2");
  // Builds the layout so that bad names or maps are reported at load time.
  (void)grid_spec();
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << "layout = " << c.layout.name << "\n";
  if (!c.layout.map.empty()) os << "layout.map = " << c.layout.map << "\n";
  if (c.layout.random_start) os << "layout.random_start = " << (*c.layout.random_start ? "true" : "false") << "\n";
  if (c.layout.goal) os << "layout.goal = " << (*c.layout.goal ? "true" : "false") << "\n";
  if (c.layout.width > 0) os << "layout.width = " << c.layout.width << "\n";
  if (c.layout.height > 0) os << "layout.height = " << c.layout.height << "\n";
  os << "strategy = ";
  for (std::size_t i = 0; i < c.strategies.size(); ++i) os << (i ? "," : "") << to_string(c.strategies[i]);
  os << "\nmode = " << to_string(c.mode) << "\nseeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
  os << "\niterations = " << c.iterations << "\neval_interval = " << c.eval_interval
     << "\noutput_dir = " << c.output_dir << "\ncheckpoint = " << (c.checkpoint ? "true" : "false") << "\n";
  os << "sac.lambda_sac = " << fmt_real(c.sac.lambda_sac) << "\nsac.gamma = " << fmt_real(c.sac.gamma)
     << "\nsac.polyak_tau = " << fmt_real(c.sac.polyak_tau) << "\nsac.critic_lr = " << fmt_real(c.sac.critic_lr)
     << "\nsac.actor_lr = " << fmt_real(c.sac.actor_lr) << "\nsac.batch_size = " << c.sac.batch_size
     << "\nsac.critic_updates_per_iter = " << c.sac.critic_updates_per_iter
     << "\nsac.visitation_updates_per_iter = " << c.sac.visitation_updates_per_iter
     << "\nsac.actor_centering = " << to_string(c.sac.actor_centering)
     << "\nsac.env_steps_per_iter = " << c.sac.env_steps_per_iter << "\nsac.horizon = " << c.sac.horizon
     << "\nsac.n_step = " << c.sac.n_step << "\nsac.buffer_capacity = " << c.sac.buffer_capacity
     << "\nsac.critic_init = " << fmt_real(c.sac.critic_init) << "\nsac.warmup_steps = " << c.sac.warmup_steps
     << "\n";
  os << "visitation.gamma_prime = " << fmt_real(c.visitation.gamma_prime)
     << "\nvisitation.learning_rate = " << fmt_real(c.visitation.learning_rate)
     << "\nvisitation.batch_size = " << c.visitation.batch_size
     << "\nvisitation.polyak_tau = " << fmt_real(c.visitation.polyak_tau)
     << "\nvisitation.weight_clip = " << fmt_real(c.visitation.weight_clip)
     << "\nvisitation.exact_policy_ratio = " << (c.visitation.exact_policy_ratio ? "true" : "false") << "\n";
  os << "reward.lambda = " << fmt_real(c.reward.lambda) << "\n";
  if (c.mode == Mode::Control) os << "reward.lambda_r = " << fmt_real(c.reward.lambda_r) << "\n";
  os << "reward.clip_min = " << fmt_real(c.reward.clip_min) << "\nreward.clip_max = " << fmt_real(c.reward.clip_max)
     << "\nreward.mv_decay = " << fmt_real(c.mv_decay) << "\nreward.qstar = uniform\n";
  os << "metrics.estimator = " << to_string(c.metrics.estimator) << "\nmetrics.mc_episodes = " << c.metrics.mc_episodes
     << "\nmetrics.mc_horizon = " << c.metrics.mc_horizon << "\n";
  return os.str();
}

}  // namespace vismax
