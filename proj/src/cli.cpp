#include "crowdsim/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "crowdsim/evaluation.hpp"

namespace crowdsim::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Thrown for file system failures; maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* policy_name(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::StraightLine:
      return "straight";
    case PolicyKind::OrcaRobot:
      return "orca";
    case PolicyKind::External:
      return "external";
  }
  return "external";
}

RobotPolicy make_policy(PolicyKind policy) {
  if (policy == PolicyKind::StraightLine) return straight_line;
  return orca_robot;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<fs::path> expand_patterns(const std::vector<std::string>& patterns) {
  std::vector<fs::path> files;
  for (std::string pattern : patterns) {
    if (fs::is_directory(pattern)) pattern = (fs::path(pattern) / "*.jsonl").string();
    glob_t matches{};
    if (::glob(pattern.c_str(), 0, nullptr, &matches) == 0) {
      for (std::size_t i = 0; i < matches.gl_pathc; ++i) files.emplace_back(matches.gl_pathv[i]);
    }
    ::globfree(&matches);
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

EpisodeLog load_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_jsonl(in);
  } catch (const LogError& e) {
    throw LogError(path.string() + ": " + e.what());
  }
}

std::string group_key(const EpisodeLog& log, const std::string& group_by) {
  if (group_by == "scenario") return to_string(log.scenario.kind);
  if (group_by == "policy") return log.policy;
  if (group_by == "mode") return json(log.config).at("mode").get<std::string>();
  return "all";
}

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("crowdsim");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("CROWDSIM_LOG_LEVEL")) {
      spdlog::set_level(spdlog::level::from_str(level));
    }
  });
}

}  // namespace

std::string log_file_name(std::uint64_t seed) { return fmt::format("episode_{:06d}.jsonl", seed); }

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  if (spec.episodes < 1) {
    err << "error: --episodes must be >= 1\n";
    return kUsage;
  }
  if (spec.workers < 1) {
    err << "error: --workers must be >= 1\n";
    return kUsage;
  }
  if (spec.policy == PolicyKind::External) {
    err << "error: --policy external needs a driver on the foreign-function boundary "
           "(see crowdsim/c_api.h)\n";
    return kUsage;
  }
  try {
    spec.config.validate();
    // Surface scenario errors before spawning workers.
    spec.scenario.generate(spec.seed).validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const json echo{{"config", json(spec.config)},
                  {"scenario", to_json(spec.scenario)},
                  {"policy", policy_name(spec.policy)},
                  {"episodes", spec.episodes},
                  {"seed", spec.seed},
                  {"workers", spec.workers}};
  out << echo.dump(2) << '\n';

  std::error_code ec;
  fs::create_directories(spec.out, ec);
  if (ec) {
    err << "error: cannot create " << spec.out << ": " << ec.message() << '\n';
    return kIo;
  }
  {
    std::ofstream manifest(spec.out / "run.json");
    manifest << echo.dump(2) << '\n';
    if (!manifest) {
      err << "error: cannot write " << spec.out / "run.json" << '\n';
      return kIo;
    }
  }

  const RobotPolicy policy = make_policy(spec.policy);
  std::atomic<long> next{0};
  std::mutex error_mutex;
  std::string first_error;
  int exit_code = kOk;

  auto worker = [&] {
    for (long i = next++; i < spec.episodes; i = next++) {
      const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(i);
      try {
        const ScenarioConfig scenario = spec.scenario.generate(seed);
        const EpisodeLog log =
            run_episode(spec.config, scenario, seed, policy, policy_name(spec.policy));
        const fs::path path = spec.out / log_file_name(seed);
        std::ofstream file(path, std::ios::binary);
        write_jsonl(file, log);
        if (!file) throw IoError("cannot write " + path.string());
        spdlog::info("episode seed={} termination={} steps={}", seed, to_string(log.termination),
                     log.steps.size());
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (first_error.empty()) {
          first_error = e.what();
          exit_code = dynamic_cast<const IoError*>(&e) != nullptr ? kIo : kUsage;
        }
      }
    }
  };

  const int workers = static_cast<int>(std::min<long>(spec.workers, spec.episodes));
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (exit_code != kOk) {
    err << "error: " << first_error << '\n';
    return exit_code;
  }
  return kOk;
}

int cmd_eval(const EvalSpec& spec, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> groupings{"none", "scenario", "policy", "mode"};
  if (std::find(groupings.begin(), groupings.end(), spec.group_by) == groupings.end()) {
    err << "error: --group-by must be one of none, scenario, policy, mode\n";
    return kUsage;
  }
  const std::vector<fs::path> files = expand_patterns(spec.patterns);
  if (files.empty()) {
    err << "error: no logs match\n";
    return kUsage;
  }

  std::map<std::string, std::vector<EpisodeMetrics>> groups;
  std::vector<std::string> names;
  std::vector<EpisodeMetrics> all;
  try {
    for (const fs::path& file : files) {
      const EpisodeLog log = load_log(file);
      const EpisodeMetrics metrics = episode_metrics(log);
      groups[group_key(log, spec.group_by)].push_back(metrics);
      names.push_back(file.filename().string());
      all.push_back(metrics);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::vector<MetricsSummary> rows;
  for (const auto& [key, metrics] : groups) rows.push_back(aggregate(metrics, key));

  std::ofstream csv(spec.out);
  write_summary_csv(csv, rows);
  if (!csv) {
    err << "error: cannot write " << spec.out << '\n';
    return kIo;
  }
  if (spec.episodes_out) {
    std::ofstream per_episode(*spec.episodes_out);
    write_episode_csv(per_episode, names, all);
    if (!per_episode) {
      err << "error: cannot write " << *spec.episodes_out << '\n';
      return kIo;
    }
  }
  write_summary_table(out, rows);
  return kOk;
}

int cmd_plotdata(const fs::path& log_path, const fs::path& out_path, std::ostream& err) {
  EpisodeLog log;
  try {
    log = load_log(log_path);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  std::ofstream out(out_path);
  write_plot_data(out, log);
  if (!out) {
    err << "error: cannot write " << out_path << '\n';
    return kIo;
  }
  return kOk;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Crowd navigation simulator with socially adaptive rewards"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run episodes and write JSONL logs");
  std::string scenario_name;
  std::string scenario_file;
  std::string config_file;
  std::string policy = "orca";
  std::string mode;
  long episodes = 1;
  std::uint64_t seed = 0;
  std::string run_out = "logs";
  int workers = 1;
  run->add_option("--scenario", scenario_name, "circle-ho | circle-he | passing");
  run->add_option("--scenario-file", scenario_file, "scenario or generator JSON");
  run->add_option("--episodes", episodes, "number of episodes");
  run->add_option("--seed", seed, "base seed; episode i uses seed + i");
  run->add_option("--policy", policy, "straight | orca | external");
  run->add_option("--mode", mode, "si (socially integrated) | sa (socially aware)");
  run->add_option("--config", config_file, "environment config JSON");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--workers", workers, "parallel episodes");

  // eval
  auto* eval = app.add_subcommand("eval", "Aggregate metrics over episode logs");
  EvalSpec eval_spec;
  std::string eval_out = "summary.csv";
  std::string episodes_out;
  eval->add_option("--logs,logs", eval_spec.patterns, "log files, globs or directories")
      ->required();
  eval->add_option("--out", eval_out, "summary CSV path");
  eval->add_option("--episodes-out", episodes_out, "optional per-episode CSV path");
  eval->add_option("--group-by", eval_spec.group_by, "none | scenario | policy | mode");

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "Export trajectories for plotting");
  std::string plot_log;
  std::string plot_out = "trajectory.csv";
  plot->add_option("--log,log", plot_log, "episode log")->required();
  plot->add_option("--out", plot_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  if (*eval) {
    eval_spec.out = eval_out;
    if (!episodes_out.empty()) eval_spec.episodes_out = episodes_out;
    return cmd_eval(eval_spec, out, err);
  }
  if (*plot) return cmd_plotdata(plot_log, plot_out, err);

  // Precedence: flags, then the config file, then built-in defaults.
  RunSpec spec;
  try {
    json file_config = json::object();
    if (!config_file.empty()) file_config = read_json_file(config_file);
    if (!file_config.is_object()) throw ConfigError("--config must hold a JSON object");

    json env_json = file_config;
    env_json.erase("scenario");
    if (!mode.empty()) {
      if (mode != "si" && mode != "sa") throw ConfigError("--mode must be si or sa");
      env_json["mode"] = mode;
      if (env_json.contains("reward")) env_json["reward"].erase("mode");
    }
    spec.config = env_json.get<EnvConfig>();

    if (!scenario_file.empty() && !scenario_name.empty()) {
      throw ConfigError("--scenario and --scenario-file are exclusive");
    }
    if (!scenario_file.empty()) {
      spec.scenario = scenario_source_from_json(read_json_file(scenario_file));
    } else {
      json generator = file_config.value("scenario", json::object());
      if (!scenario_name.empty()) generator["generator"] = scenario_name;
      if (!generator.contains("generator")) generator["generator"] = "circle-he";
      spec.scenario = scenario_source_from_json(generator);
    }

    if (policy == "straight") {
      spec.policy = PolicyKind::StraightLine;
    } else if (policy == "orca") {
      spec.policy = PolicyKind::OrcaRobot;
    } else if (policy == "external") {
      spec.policy = PolicyKind::External;
    } else {
      throw ConfigError("--policy must be straight, orca or external");
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  spec.episodes = episodes;
  spec.seed = seed;
  spec.out = run_out;
  spec.workers = workers;
  return cmd_run(spec, out, err);
}

}  // namespace crowdsim::cli
