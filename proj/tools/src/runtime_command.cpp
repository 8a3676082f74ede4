#include <cmath>
#include <fstream>

#include <json.hpp>

#include "commands.hpp"
#include "output.hpp"
#include "tdlab/serialization.hpp"

namespace tdlab::cli {

namespace {

std::string request_hash(const RuntimeRequest& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode == RuntimeMode::table ? "table" : "budget";
  j["setting"] = std::string(to_string(r.runtime.setting));
  j["n_steps"] = r.runtime.n_steps;
  j["n_mdps"] = r.runtime.n_mdps;
  j["n_runs"] = r.runtime.n_runs;
  j["repeats"] = r.runtime.repeats;
  j["seed_root"] = r.runtime.seed_root;
  j["hp"] = {r.runtime.hp.alpha, r.runtime.hp.eta, r.runtime.hp.lambda, r.runtime.hp.beta_scale};
  j["c_values"] = r.c_values;
  j["n_iterations"] = r.n_iterations;
  return fnv1a64_hex(j.dump());
}

void run_table(const RuntimeRequest& request, OutputDir& dir, std::ostream& log) {
  auto out = dir.open("runtime_table.csv");
  out << "setting,algorithm,microseconds\n";
  for (auto setting : {Setting::on_policy, Setting::off_policy}) {
    RuntimeConfig rc = request.runtime;
    rc.setting = setting;
    for (const auto& name : algorithms_for(setting)) {
      const double us = measure_runtime(find_algorithm(name), rc);
      out << to_string(setting) << ',' << name << ',' << format_number(us) << '\n';
      log << to_string(setting) << "  " << name << "  " << us << " us\n";
    }
  }
  dir.close(out, "runtime_table.csv");
}

void run_budget(const RuntimeRequest& request, OutputDir& dir, std::ostream& log) {
  const auto& rt = request.runtime;
  RunConfig run;
  run.setting = rt.setting;
  run.algorithm = "td0";
  run.n_mdps = rt.n_mdps;
  run.n_runs = rt.n_runs;
  run.seed_root = rt.seed_root;
  run.env = rt.env;
  const auto instances = make_instances(run);

  std::vector<RealtimeLearner> learners;
  for (const auto& name : algorithms_for(rt.setting)) learners.push_back({&find_algorithm(name), rt.hp});

  auto summary = dir.open("budget/summary.csv");
  summary << "c_ms,algorithm,final_mean,final_stderr,mean_samples\n";
  for (double c : request.c_values) {
    const std::string tag = "c_" + format_number(c);
    log << "budget c=" << c << " ms\n";
    // curves[learner][trial]
    std::vector<std::vector<ErrorCurve>> curves(learners.size());
    std::vector<std::vector<std::vector<double>>> samples(learners.size());
    for (const auto& problem : instances) {
      for (std::size_t j = 0; j < rt.n_runs; ++j) {
        RealtimeConfig cfg;
        cfg.c_ms = c;
        cfg.n_iterations = request.n_iterations;
        cfg.seed = trial_seed(rt.seed_root, problem.index, j, 0);
        const auto results = run_realtime(problem, learners, cfg);
        for (std::size_t l = 0; l < learners.size(); ++l) {
          for (const auto& w : results[l].warnings) log << "  warning: " << w << "\n";
          curves[l].push_back(results[l].curve);
          std::vector<double> counts(results[l].samples_per_iteration.begin(),
                                     results[l].samples_per_iteration.end());
          samples[l].push_back(std::move(counts));
        }
      }
    }
    for (std::size_t l = 0; l < learners.size(); ++l) {
      const std::string name(learners[l].algorithm->name);
      const auto agg = aggregate(curves[l]);
      const auto counts = aggregate(samples[l]);
      const std::string file = "budget/" + tag + "/" + name + ".csv";
      auto out = dir.open(file);
      out << "iteration,mean,stderr,n,mean_samples\n";
      double total = 0.0;
      for (std::size_t i = 0; i < agg.mean.size(); ++i) {
        out << i + 1 << ',' << format_number(agg.mean[i]) << ',' << format_number(agg.stderr_[i])
            << ',' << agg.n << ',' << format_number(counts.mean[i]) << '\n';
        total += counts.mean[i];
      }
      dir.close(out, file);
      summary << format_number(c) << ',' << name << ',' << format_number(agg.mean.back()) << ','
              << format_number(agg.stderr_.back()) << ',' << format_number(total) << '\n';
    }
  }
  dir.close(summary, "budget/summary.csv");
}

}  // namespace

void execute_runtime(const RuntimeRequest& request, std::ostream& log) {
  if (request.mode == RuntimeMode::budget) {
    if (request.c_values.empty()) throw ConfigError("budget mode needs at least one c value");
    for (double c : request.c_values) {
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw ConfigError("c values must be positive and finite milliseconds");
      }
    }
    if (request.n_iterations == 0) throw ConfigError("iterations must be positive");
  }
  const auto& rt = request.runtime;
  if (rt.n_steps == 0 || rt.n_mdps == 0 || rt.n_runs == 0 || rt.repeats == 0) {
    throw ConfigError("runtime counts must be positive");
  }
  OutputDir dir(request.out);
  if (request.mode == RuntimeMode::table) {
    run_table(request, dir, log);
  } else {
    run_budget(request, dir, log);
  }
  dir.write_manifest(request.mode == RuntimeMode::table ? "runtime-table" : "runtime-budget",
                     request_hash(request));
}

}  // namespace tdlab::cli
