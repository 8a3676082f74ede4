#include "tdlab/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "output.hpp"

namespace tdlab::cli {

namespace {

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || end != item.data() + item.size()) {
      throw ConfigError(std::string(what) + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

template <typename T, typename Parse>
T parse_name(const std::string& text, Parse parse) {
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void apply_seed_override(std::uint64_t& seed_root) {
  if (const auto seed = seed_from_environment()) seed_root = *seed;
}

/// Flags shared by sweep and baird.
struct SweepFlags {
  std::optional<std::string> algorithms;
  std::optional<std::string> out;
  std::size_t jobs = 0;
  std::string raw = "best";
  std::string curves = "best";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--algorithms", algorithms, "Comma-separated algorithm names");
    cmd.add_option("--out", out, "Output directory");
    cmd.add_option("--jobs", jobs, "Worker threads (0 = all cores)")->capture_default_str();
    cmd.add_option("--raw", raw, "Per-trial curve rows: all, best or none")->capture_default_str();
    cmd.add_option("--curves", curves, "Aggregated curve rows: all, best or none")
        ->capture_default_str();
  }

  SweepRequest request(const std::string& command, ExperimentConfig config) const {
    if (algorithms) {
      config.algorithms = split_list(*algorithms);
      if (config.algorithms.empty()) throw ConfigError("--algorithms is empty");
    }
    if (out) config.out = *out;
    apply_seed_override(config.run.seed_root);
    config.algorithms = resolve_algorithms(config);
    SweepRequest r;
    r.command = command;
    r.config = std::move(config);
    r.jobs = jobs;
    r.raw = parse_curve_scope(raw);
    r.aggregated = parse_curve_scope(curves);
    return r;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear temporal-difference learning experiments", "tdlab"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Hyperparameter sweep on random MDPs");
  std::string config_path;
  std::optional<std::string> setting, representation;
  SweepFlags sweep_flags;
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--setting", setting, "on-policy or off-policy");
  sweep->add_option("--representation", representation, "tabular, aliased-tabular or binary");
  sweep_flags.add_to(*sweep);

  // baird
  auto* baird = app.add_subcommand("baird", "Sweep on Baird's counterexample");
  SweepFlags baird_flags;
  std::string baird_metric = "rmse";
  std::size_t baird_runs = 500, baird_steps = 2000;
  std::optional<std::string> baird_alphas, baird_etas, baird_lambdas;
  baird_flags.add_to(*baird);
  baird->add_option("--metric", baird_metric, "rmse or rmspbe")->capture_default_str();
  baird->add_option("--runs", baird_runs, "Runs per cell")->capture_default_str();
  baird->add_option("--steps", baird_steps, "Steps per run")->capture_default_str();
  baird->add_option("--alphas", baird_alphas, "Override the step-size grid");
  baird->add_option("--etas", baird_etas, "Override the eta grid");
  baird->add_option("--lambdas", baird_lambdas, "Override the lambda grid");

  // runtime
  auto* runtime = app.add_subcommand("runtime", "Per-update runtime measurements");
  std::string mode = "table";
  std::optional<std::string> c_values;
  std::string runtime_out = "runtime", runtime_setting = "on-policy";
  RuntimeRequest rt;
  std::size_t runtime_jobs = 1;
  runtime->add_option("--mode", mode, "table or budget")->capture_default_str();
  runtime->add_option("--c-values", c_values, "Budget mode: milliseconds per iteration, comma-separated");
  runtime->add_option("--out", runtime_out, "Output directory")->capture_default_str();
  runtime->add_option("--setting", runtime_setting, "Budget mode setting")->capture_default_str();
  runtime->add_option("--steps", rt.runtime.n_steps, "Table mode: steps per measurement")
      ->capture_default_str();
  runtime->add_option("--mdps", rt.runtime.n_mdps, "MDPs")->capture_default_str();
  runtime->add_option("--runs", rt.runtime.n_runs, "Runs per MDP")->capture_default_str();
  runtime->add_option("--repeats", rt.runtime.repeats, "Table mode: timed repeats")
      ->capture_default_str();
  runtime->add_option("--iterations", rt.n_iterations, "Budget mode: iterations")
      ->capture_default_str();
  runtime->add_option("--jobs", runtime_jobs, "Ignored; timing always runs on one thread");

  // report
  auto* report = app.add_subcommand("report", "Summarise sweep results");
  std::string results_dir;
  std::optional<std::string> report_out;
  report->add_option("results", results_dir, "Directory holding sweep outputs")->required();
  report->add_option("--out", report_out, "Output directory (default RESULTS/report)");

  // emit-default-config
  auto* emit = app.add_subcommand("emit-default-config", "Print the default experiment config");
  std::optional<std::string> emit_out;
  emit->add_option("--out", emit_out, "Write to a file instead of standard output");

  try {
    std::vector<std::string> reversed(args.size() > 0 ? args.begin() + 1 : args.begin(), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sweep) {
      auto config = load_experiment_config(config_path);
      if (setting) config.run.setting = parse_name<Setting>(*setting, parse_setting);
      if (config.run.setting == Setting::baird) {
        throw ConfigError("use the baird command for Baird's problem");
      }
      if (representation) {
        config.run.representation = parse_name<FeatureKind>(*representation, parse_feature_kind);
      }
      execute_sweep(sweep_flags.request("sweep", std::move(config)), out);
    } else if (*baird) {
      ExperimentConfig config;
      config.run.setting = Setting::baird;
      config.run.representation = FeatureKind::custom;
      config.run.metric = parse_name<MetricKind>(baird_metric, parse_metric_kind);
      if (config.run.metric == MetricKind::mave) throw ConfigError("baird supports rmse or rmspbe");
      config.run.n_mdps = 1;
      config.run.n_runs = baird_runs;
      config.run.n_steps = baird_steps;
      config.grid = SweepGrid::baird();
      if (baird_alphas) config.grid.alphas = parse_numbers(*baird_alphas, "--alphas");
      if (baird_etas) config.grid.etas = parse_numbers(*baird_etas, "--etas");
      if (baird_lambdas) config.grid.lambdas = parse_numbers(*baird_lambdas, "--lambdas");
      try {
        validate(config.grid);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      config.out = "baird";
      execute_sweep(baird_flags.request("baird", std::move(config)), out);
    } else if (*runtime) {
      if (mode == "table") {
        rt.mode = RuntimeMode::table;
      } else if (mode == "budget") {
        rt.mode = RuntimeMode::budget;
        if (!c_values) throw ConfigError("budget mode needs --c-values");
        rt.c_values = parse_numbers(*c_values, "--c-values");
        rt.runtime.setting = parse_name<Setting>(runtime_setting, parse_setting);
        if (rt.runtime.setting == Setting::baird) throw ConfigError("budget mode runs on random MDPs");
      } else {
        throw ConfigError("unknown mode '" + mode + "' (expected table or budget)");
      }
      if (runtime_jobs != 1) err << "note: runtime measurements always use one thread\n";
      apply_seed_override(rt.runtime.seed_root);
      rt.out = runtime_out;
      execute_runtime(rt, out);
    } else if (*report) {
      const std::filesystem::path results(results_dir);
      execute_report(results, report_out ? std::filesystem::path(*report_out) : results / "report",
                     out);
    } else if (*emit) {
      const auto text = to_json(default_experiment_config());
      if (emit_out) {
        std::ofstream f(*emit_out, std::ios::binary | std::ios::trunc);
        f << text;
        f.close();
        if (!f) throw IoError("cannot write '" + *emit_out + "'");
      } else {
        out << text;
      }
    }
  } catch (const ConfigError& e) {
    err << "tdlab: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "tdlab: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "tdlab: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace tdlab::cli
