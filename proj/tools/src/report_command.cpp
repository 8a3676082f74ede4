#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "output.hpp"
#include "tdlab/serialization.hpp"

namespace tdlab::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Sweep {
  std::string source;
  fs::path dir;
  Json summary;
};

/// `results` itself and its immediate subdirectories, by name.
std::vector<Sweep> find_sweeps(const fs::path& results) {
  std::error_code ec;
  if (!fs::is_directory(results, ec)) {
    throw IoError("results directory '" + results.string() + "' does not exist");
  }
  std::vector<std::pair<std::string, fs::path>> dirs;
  if (fs::exists(results / "summary.json")) dirs.emplace_back(".", results);
  for (const auto& entry : fs::directory_iterator(results, ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) {
      dirs.emplace_back(entry.path().filename().string(), entry.path());
    }
  }
  if (ec) throw IoError("cannot list '" + results.string() + "'");
  std::sort(dirs.begin(), dirs.end());

  std::vector<Sweep> out;
  for (auto& [source, dir] : dirs) {
    Json summary;
    try {
      summary = Json::parse(read_file(dir / "summary.json"));
      (void)summary.at("algorithms").size();
    } catch (const Json::exception& e) {
      throw IoError("malformed summary in '" + dir.string() + "': " + e.what());
    }
    out.push_back({source, dir, std::move(summary)});
  }
  if (out.empty()) throw IoError("no sweep results under '" + results.string() + "'");
  return out;
}

/// Six significant digits; full precision stays in the CSV artifacts.
std::string short_number(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

std::string describe(const Sweep& s) {
  const auto& j = s.summary;
  std::ostringstream o;
  o << "== " << s.source << " ==\n";
  o << "command " << j.value("command", "sweep") << ", setting " << j.value("setting", "?")
    << ", representation " << j.value("representation", "?") << ", metric "
    << j.value("metric", "?") << "\n";
  o << j.value("n_mdps", 0) << " mdps x " << j.value("n_runs", 0) << " runs x "
    << j.value("n_steps", 0) << " steps, seed_root " << j.value("seed_root", 0ull) << "\n";
  o << std::left << std::setw(12) << "algorithm" << std::setw(14) << "alpha" << std::setw(12)
    << "eta" << std::setw(8) << "lambda" << std::setw(14) << "objective" << std::setw(14)
    << "final" << "diverged_runs\n";
  for (const auto& a : j.at("algorithms")) {
    const auto& b = a.at("best");
    const auto diverged = a.value("diverged_runs", 0ull);
    o << std::left << std::setw(12) << a.value("name", "?") << std::setw(14)
      << short_number(b.value("alpha", 0.0)) << std::setw(12)
      << short_number(b.value("eta", 0.0)) << std::setw(8)
      << short_number(b.value("lambda", 0.0)) << std::setw(14)
      << short_number(b.value("objective", 0.0)) << std::setw(14)
      << short_number(b.value("final_mean", 0.0)) << diverged
      << (b.value("diverged_runs", 0ull) > 0 ? "  DIVERGED AT BEST" : "") << "\n";
  }
  return o.str();
}

/// Best-cell curves and sensitivity points in long format.
void append_long_rows(const Sweep& s, std::string& out) {
  const std::string head = s.source + "," + s.summary.value("setting", "?") + "," +
                           s.summary.value("representation", "?") + ",";
  std::vector<std::pair<std::string, std::string>> best;  // name, "alpha,eta,lambda"
  for (const auto& a : s.summary.at("algorithms")) {
    const auto& b = a.at("best");
    best.emplace_back(a.value("name", "?"), format_number(b.value("alpha", 0.0)) + "," +
                                                format_number(b.value("eta", 0.0)) + "," +
                                                format_number(b.value("lambda", 0.0)));
  }

  std::ifstream agg(s.dir / "aggregated.csv");
  std::string line;
  if (agg && std::getline(agg, line)) {
    while (std::getline(agg, line)) {
      const auto f = split_list(line);
      if (f.size() != 10) continue;
      const std::string key = f[3] + "," + f[4] + "," + f[5];
      const bool is_best = std::any_of(best.begin(), best.end(), [&](const auto& b) {
        return b.first == f[0] && b.second == key;
      });
      if (is_best) out += head + f[0] + ",curve," + f[6] + "," + f[7] + "," + f[8] + "\n";
    }
  }
  std::ifstream sens(s.dir / "sensitivity.csv");
  if (sens && std::getline(sens, line)) {
    while (std::getline(sens, line)) {
      const auto f = split_list(line);
      if (f.size() != 7) continue;
      out += head + f[0] + ",sensitivity_" + f[1] + "," + f[2] + "," + f[3] + ",\n";
    }
  }
}

}  // namespace

void execute_report(const fs::path& results, const fs::path& out, std::ostream& log) {
  const auto sweeps = find_sweeps(results);
  std::string text;
  std::string rows = "source,setting,representation,algorithm,series,x,y,stderr\n";
  std::string hashes;
  for (const auto& s : sweeps) {
    const auto section = describe(s);
    text += section + "\n";
    append_long_rows(s, rows);
    hashes += s.summary.value("config_hash", "") + ";";
  }
  OutputDir dir(out);
  dir.write_text("report.txt", text);
  dir.write_text("report_long.csv", rows);
  dir.write_manifest("report", fnv1a64_hex(hashes));
  log << text;
}

}  // namespace tdlab::cli
