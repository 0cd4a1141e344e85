#pragma once

#include "vismax/gridworld.hpp"
#include "vismax/intrinsic_reward.hpp"
#include "vismax/sac_agent.hpp"
#include "vismax/visitation_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vismax {

/// Invalid configuration; the message is prefixed with "source:line: ".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& what);
  ConfigError(const std::string& source, const std::string& what);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_ = 0;
};

enum class Mode { Explore, Control };
enum class Estimator { Exact, MonteCarlo };

std::string to_string(Mode m);
std::string to_string(Estimator e);

struct LayoutConfig {
  std::string name = "two-rooms";
  std::string map;                  // inline map, overrides name when set
  std::optional<bool> random_start;  // unset: the layout's default
  std::optional<bool> goal;          // unset: present only in control mode
  int width = 0;
  int height = 0;
};

struct MetricsConfig {
  Estimator estimator = Estimator::Exact;
  std::size_t mc_episodes = 200;
  std::size_t mc_horizon = 0;  // 0: smallest horizon with gamma^H < 1e-6
};

struct RunConfig {
  LayoutConfig layout;
  std::vector<Strategy> strategies{Strategy::CV};
  Mode mode = Mode::Explore;
  std::vector<std::uint64_t> seeds{0};
  std::size_t iterations = 100;
  std::size_t eval_interval = 10;
  std::string output_dir = "runs";
  bool checkpoint = false;

  SacParams sac;
  VisitationTrainConfig visitation;  // gamma and n_step mirror sac
  RewardConfig reward;               // strategy and qstar are filled per run
  double mv_decay = 0.99;
  MetricsConfig metrics;

  GridSpec grid_spec() const;
  std::string layout_label() const;
  std::size_t mc_horizon() const;
  void validate() const;
};

/// One `key = value` assignment with its origin.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::string source;
  std::size_t line = 0;
};

std::vector<ConfigEntry> parse_config_entries(std::istream& is, const std::string& source);
/// "key=value" from the command line.
ConfigEntry parse_override(const std::string& assignment, std::size_t index);

/// Applies entries in order onto the defaults, then derives and validates.
RunConfig build_config(const std::vector<ConfigEntry>& entries);

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

/// Canonical text form; feeding it back through parse_config gives the same config.
std::string describe(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace vismax
