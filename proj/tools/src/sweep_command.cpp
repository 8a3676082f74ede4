#include <fstream>
#include <span>

#include <json.hpp>

#include "commands.hpp"
#include "output.hpp"
#include "tdlab/serialization.hpp"

namespace tdlab::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kRawHeader =
    "algorithm,setting,representation,alpha,eta,lambda,mdp_id,run_id,step,metric_value\n";
constexpr const char* kAggregatedHeader =
    "algorithm,setting,representation,alpha,eta,lambda,step,mean,stderr,n\n";

/// "alg,setting,representation,alpha,eta,lambda," for one cell.
std::string row_prefix(const std::string& algorithm, const RunConfig& run,
                       const HyperParams& hp) {
  std::string s = algorithm;
  s += ',';
  s += to_string(run.setting);
  s += ',';
  s += to_string(run.representation);
  for (double v : {hp.alpha, hp.eta, hp.lambda}) {
    s += ',';
    append_number(s, v);
  }
  s += ',';
  return s;
}

void write_raw(std::ofstream& out, const std::string& prefix, std::size_t n_runs,
               std::span<const ErrorCurve> curves) {
  std::string buf;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto mdp = std::to_string(c / n_runs);
    const auto run = std::to_string(c % n_runs);
    const auto& values = curves[c].values;
    buf.clear();
    for (std::size_t t = 0; t < values.size(); ++t) {
      buf += prefix;
      buf += mdp;
      buf += ',';
      buf += run;
      buf += ',';
      buf += std::to_string(t + 1);
      buf += ',';
      append_number(buf, values[t]);
      buf += '\n';
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void write_aggregated(std::ofstream& out, const std::string& prefix, const AggregateCurve& curve) {
  std::string buf;
  for (std::size_t t = 0; t < curve.mean.size(); ++t) {
    buf += prefix;
    buf += std::to_string(t + 1);
    buf += ',';
    append_number(buf, curve.mean[t]);
    buf += ',';
    append_number(buf, curve.stderr_[t]);
    buf += ',';
    buf += std::to_string(curve.n);
    buf += '\n';
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

/// The best cell's raw curves, recomputed from its trial seeds.
std::vector<ErrorCurve> rerun_cell(const RunConfig& run, const Algorithm& algorithm,
                                   const std::vector<ProblemInstance>& instances,
                                   const CellResult& cell) {
  std::vector<ErrorCurve> curves;
  for (const auto& problem : instances) {
    for (std::size_t j = 0; j < run.n_runs; ++j) {
      curves.push_back(run_trial(problem, algorithm, cell.params, run.n_steps,
                                 trial_seed(run.seed_root, problem.index, j, cell.index),
                                 run.metric, run.clamp_ceiling));
    }
  }
  return curves;
}

Json params_json(const CellResult& cell) {
  Json j;
  j["cell"] = cell.index;
  j["alpha"] = cell.params.alpha;
  j["eta"] = cell.params.eta;
  j["lambda"] = cell.params.lambda;
  j["objective"] = cell.objective;
  j["final_mean"] = cell.curve.mean.empty() ? 0.0 : cell.curve.mean.back();
  j["final_stderr"] = cell.curve.stderr_.empty() ? 0.0 : cell.curve.stderr_.back();
  j["diverged_runs"] = cell.diverged_runs;
  j["clamped_runs"] = cell.clamped_runs;
  return j;
}

}  // namespace

CurveScope parse_curve_scope(const std::string& name) {
  if (name == "all") return CurveScope::all;
  if (name == "best") return CurveScope::best;
  if (name == "none") return CurveScope::none;
  throw ConfigError("unknown curve scope '" + name + "' (expected all, best or none)");
}

void execute_sweep(const SweepRequest& request, std::ostream& log) {
  const auto& config = request.config;
  const auto& run = config.run;
  const auto& grid = config.grid;
  if (config.algorithms.empty()) throw ConfigError("no algorithms to run");

  const std::string config_text = to_json(config);
  // The output location does not change results, so it stays out of the hash.
  ExperimentConfig hashed = config;
  hashed.out.clear();
  const std::string config_hash = fnv1a64_hex(to_json(hashed));

  OutputDir dir(config.out);
  dir.write_text("config.json", config_text);

  RunConfig first = run;
  first.algorithm = config.algorithms.front();
  const auto instances = make_instances(first);

  auto raw = dir.open("raw.csv");
  raw << kRawHeader;
  auto aggregated = dir.open("aggregated.csv");
  aggregated << kAggregatedHeader;
  auto objectives = dir.open("objectives.csv");
  objectives << "algorithm,cell,alpha,eta,lambda,objective,diverged_runs,clamped_runs\n";
  auto sens = dir.open("sensitivity.csv");
  sens << "algorithm,parameter,value,objective,alpha,eta,lambda\n";

  Json summary;
  summary["version"] = kConfigVersion;
  summary["command"] = request.command;
  summary["setting"] = std::string(to_string(run.setting));
  summary["representation"] = std::string(to_string(run.representation));
  summary["metric"] = std::string(to_string(run.metric));
  summary["seed_root"] = run.seed_root;
  summary["n_mdps"] = run.n_mdps;
  summary["n_runs"] = run.n_runs;
  summary["n_steps"] = run.n_steps;
  summary["grid"] = {{"alphas", grid.alphas}, {"etas", grid.etas}, {"lambdas", grid.lambdas}};
  if (grid.alphas == default_alphas()) {
    summary["grid_note"] =
        "default step sizes: {0.1 * 2^j : j = -8..6}, 15 values";
  }
  summary["config_hash"] = config_hash;
  Json inst = Json::array();
  for (const auto& p : instances) {
    inst.push_back({{"index", p.index},
                    {"seed", p.seed},
                    {"rejected_seeds", p.rejected_seeds},
                    {"fingerprint", p.fingerprint}});
  }
  summary["instances"] = std::move(inst);
  Json algs = Json::array();

  for (const auto& name : config.algorithms) {
    log << "sweep " << name << ": " << grid.size() << " cells x " << run.n_mdps << " mdps x "
        << run.n_runs << " runs\n";
    RunConfig rc = run;
    rc.algorithm = name;
    const auto& algorithm = find_algorithm(name);

    SweepOptions opts;
    opts.jobs = request.jobs;
    opts.on_cell = [&](const CellResult& cell, std::span<const ErrorCurve> curves) {
      const auto prefix = row_prefix(name, rc, cell.params);
      if (request.raw == CurveScope::all) write_raw(raw, prefix, rc.n_runs, curves);
      if (request.aggregated == CurveScope::all) write_aggregated(aggregated, prefix, cell.curve);
      if (!raw || !aggregated) throw IoError("error writing curve files");
    };
    const auto result = run_sweep(rc, grid, instances, opts);
    const auto& best = result.best();
    const auto best_prefix = row_prefix(name, rc, best.params);
    if (request.aggregated == CurveScope::best) {
      write_aggregated(aggregated, best_prefix, best.curve);
    }
    if (request.raw == CurveScope::best) {
      write_raw(raw, best_prefix, rc.n_runs, rerun_cell(rc, algorithm, instances, best));
    }

    std::string buf;
    for (const auto& cell : result.cells) {
      buf += name;
      buf += ',';
      buf += std::to_string(cell.index);
      for (double v : {cell.params.alpha, cell.params.eta, cell.params.lambda, cell.objective}) {
        buf += ',';
        append_number(buf, v);
      }
      buf += ',' + std::to_string(cell.diverged_runs) + ',' + std::to_string(cell.clamped_runs) +
             '\n';
    }
    objectives << buf;

    buf.clear();
    for (auto param : {SweepParam::alpha, SweepParam::eta, SweepParam::lambda}) {
      for (const auto& point : sensitivity(result, param)) {
        const auto& hp = result.cells[point.cell].params;
        buf += name;
        buf += ',';
        buf += to_string(param);
        for (double v : {point.value, point.objective, hp.alpha, hp.eta, hp.lambda}) {
          buf += ',';
          append_number(buf, v);
        }
        buf += '\n';
      }
    }
    sens << buf;

    Json entry;
    entry["name"] = name;
    entry["best"] = params_json(best);
    entry["diverged_runs"] = result.diverged_runs();
    entry["clamped_runs"] = result.clamped_runs();
    entry["cells"] = result.cells.size();
    algs.push_back(std::move(entry));
    log << "  best alpha=" << best.params.alpha << " eta=" << best.params.eta
        << " lambda=" << best.params.lambda << " objective=" << best.objective << "\n";
  }
  summary["algorithms"] = std::move(algs);

  dir.close(raw, "raw.csv");
  dir.close(aggregated, "aggregated.csv");
  dir.close(objectives, "objectives.csv");
  dir.close(sens, "sensitivity.csv");
  dir.write_text("summary.json", summary.dump(2) + "\n");
  dir.write_manifest(request.command, config_hash);
}

}  // namespace tdlab::cli
