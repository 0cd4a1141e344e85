#include "vismax/aggregate.hpp"
#include "vismax/config.hpp"
#include "vismax/run_csv.hpp"
#include "vismax/trainer.hpp"
#include "vismax/verify.hpp"

#include <CLI11.hpp>

#include <glob.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace vismax;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct RunJob {
  Strategy strategy;
  std::uint64_t seed;
};

std::uint64_t seed_offset() {
  const char* env = std::getenv("VISMAX_SEED_OFFSET");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') throw ConfigError("VISMAX_SEED_OFFSET", "expected a non-negative integer");
  return v;
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides, std::size_t jobs, bool quiet) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, overrides);
    const std::uint64_t offset = seed_offset();
    for (auto& s : cfg.seeds) s += offset;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    const std::string layout = cfg.layout_label();

    std::vector<RunJob> queue;
    for (Strategy st : cfg.strategies)
      for (std::uint64_t seed : cfg.seeds) queue.push_back({st, seed});

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr failure;

    const auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= queue.size()) return;
        {
          std::lock_guard lock(log_mutex);
          if (failure) return;
        }
        const RunJob job = queue[i];
        try {
          Trainer trainer(cfg, job.strategy, job.seed);
          std::ostringstream csv;
          write_run_csv_header(csv);
          write_run_csv_row(csv, trainer.evaluate());
          for (std::size_t it = 1; it <= cfg.iterations; ++it) {
            trainer.iterate();
            if (it % cfg.eval_interval == 0 || it == cfg.iterations) write_run_csv_row(csv, trainer.evaluate());
          }
          const std::string name = run_csv_name(layout, to_string(job.strategy), job.seed);
          write_atomically(out_dir / name, csv.str());
          if (cfg.checkpoint) {
            std::ostringstream ck;
            trainer.save_checkpoint(ck);
            write_atomically(out_dir / (name.substr(0, name.size() - 4) + ".ckpt"), ck.str());
          }
          if (!quiet) {
            std::lock_guard lock(log_mutex);
            std::cerr << "wrote " << (out_dir / name).string() << "\n";
          }
        } catch (...) {
          std::lock_guard lock(log_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, queue.size()));
    if (n_workers == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    } else if (rc != GLOB_NOMATCH) {
      globfree(&g);
      throw std::runtime_error("cannot expand '" + p + "'");
    }
    globfree(&g);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int cmd_aggregate(const std::vector<std::string>& patterns, const std::string& out_path) {
  try {
    const auto files = expand(patterns);
    if (files.size() < 2) {
      std::cerr << "error: aggregation needs at least two run files, matched " << files.size() << "\n";
      return kExitUsage;
    }
    std::vector<RunSeries> runs;
    for (const auto& f : files) runs.push_back({f, read_run_csv_file(f)});
    for (const auto& r : runs) {
      if (r.records.empty()) throw std::runtime_error(r.source + ": no records");
      if (r.records.front().strategy != runs.front().records.front().strategy ||
          r.records.front().layout != runs.front().records.front().layout)
        throw std::runtime_error("inputs mix strategies or layouts: " + runs.front().source + " vs " + r.source);
    }
    std::ostringstream os;
    write_aggregate_csv(os, aggregate_runs(runs));
    if (out_path == "-") {
      std::cout << os.str();
    } else {
      write_atomically(out_path, os.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_verify(std::size_t trials, std::uint64_t seed, const std::string& fault) {
  VerifyOptions opts;
  opts.trials = trials;
  opts.seed = seed;
  if (fault == "inverse-gamma") opts.fault = OperatorFault::InverseGamma;
  else if (!fault.empty() && fault != "none") {
    std::cerr << "error: unknown fault '" << fault << "'\n";
    return kExitUsage;
  }
  try {
    const VerifyReport report = run_verification(opts);
    report.write(std::cout);
    return report.passed() ? kExitOk : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_layouts(bool render) {
  for (const auto& name : builtin_layout_names()) {
    const GridSpec spec = make_layout(name, {.random_start = false, .with_goal = true});
    std::cout << name << "  " << spec.width << "x" << spec.height << "\n";
    if (render) std::cout << render_grid(spec) << "\n";
  }
  return kExitOk;
}

int cmd_export_oracle(const std::string& config_path, const std::vector<std::string>& overrides,
                      const std::string& out_path) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const Gridworld world = build_gridworld(cfg.grid_spec(), cfg.sac.gamma);
    const Policy pi = uniform_policy(world.mdp.n_states(), world.mdp.n_actions());
    const Table q = feature_visitation_direct(world.mdp, pi, world.features).probs();
    const Vector dz = feature_occupancy(world.mdp, pi, world.features);

    std::ostringstream os;
    os << "kind,state,action,feature,x,y,probability\n";
    for (std::size_t z = 0; z < world.n_features(); ++z)
      os << "marginal,,," << z << ',' << world.cells[z].x << ',' << world.cells[z].y << ','
         << format_real(dz(static_cast<Eigen::Index>(z))) << "\n";
    for (std::size_t s = 0; s < world.mdp.n_states(); ++s)
      for (std::size_t a = 0; a < world.mdp.n_actions(); ++a)
        for (std::size_t z = 0; z < world.n_features(); ++z) {
          const double v = q(static_cast<Eigen::Index>(world.mdp.pair(s, a)), static_cast<Eigen::Index>(z));
          if (v == 0.0) continue;
          os << "conditional," << s << ',' << a << ',' << z << ',' << world.cells[z].x << ',' << world.cells[z].y
             << ',' << format_real(v) << "\n";
        }
    if (out_path == "-") std::cout << os.str();
    else write_atomically(out_path, os.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-entropy exploration with conditional visitation rewards on tabular gridworlds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vismax 0.1.0");

  std::string config_path;
  std::vector<std::string> overrides;
  std::size_t jobs = 1;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Train every (strategy, seed) of a config and write one CSV per run");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--set", overrides, "Override a config key (key=value), repeatable")
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  run->add_option("--jobs,-j", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  run->add_flag("--quiet,-q", quiet, "Do not log written files");

  std::vector<std::string> patterns;
  std::string out_path;
  auto* agg = app.add_subcommand("aggregate", "Interquartile mean and bootstrap CI across run CSVs");
  agg->add_option("inputs", patterns, "Run CSV files or glob patterns")->required();
  agg->add_option("-o,--output", out_path, "Output CSV ('-' for stdout)")->required();

  std::size_t trials = VerifyOptions{}.trials;
  std::uint64_t seed = VerifyOptions{}.seed;
  std::string fault;
  auto* ver = app.add_subcommand("verify", "Check the visitation operator properties on random MDPs");
  ver->add_option("--trials", trials, "Random MDPs per check")->check(CLI::PositiveNumber);
  ver->add_option("--seed", seed, "Master seed");
  ver->add_option("--fault", fault, "Inject a deliberate operator bug")->group("");

  bool render = false;
  auto* lay = app.add_subcommand("layouts", "List built-in gridworld layouts");
  lay->add_flag("--render", render, "Draw each layout");

  std::string oracle_out = "-";
  auto* exp = app.add_subcommand("export-oracle", "Dump exact visitation tables of the uniform policy");
  exp->add_option("config", config_path, "Config file")->required();
  exp->add_option("--set", overrides, "Override a config key (key=value), repeatable")
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  exp->add_option("-o,--output", oracle_out, "Output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (run->parsed()) return cmd_run(config_path, overrides, jobs, quiet);
  if (agg->parsed()) return cmd_aggregate(patterns, out_path);
  if (ver->parsed()) return cmd_verify(trials, seed, fault);
  if (lay->parsed()) return cmd_layouts(render);
  if (exp->parsed()) return cmd_export_oracle(config_path, overrides, oracle_out);
  return kExitUsage;
}
