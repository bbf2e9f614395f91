// gridstack: run the multistage storage-sharing pipeline on scenario files.
//
// Exit codes: 0 success, 1 parse/validation/usage error, 2 a stage or the
// owner exchange could not produce a feasible schedule.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "artifacts.hpp"
#include "gridstack/depo.hpp"
#include "gridstack/error.hpp"
#include "gridstack/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace gridstack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;

struct Loaded {
  NetworkModel net;
  Scenario scen;
  std::vector<DepoConfig> depo;
  std::string bytes;
};

Loaded load(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ParseError(path.string() + ": no such file");
  Loaded l;
  l.bytes = cli::read_bytes(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(l.bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  ScenarioData data = parse_scenario(doc);
  const ValidationReport rep = validate(data.network, data.scenario);
  if (!rep.ok()) throw ValidationError(rep.errors.front().field, rep.errors.front().message);
  l.depo = parse_depo_configs(doc, data.network);
  l.net = std::move(data.network);
  l.scen = std::move(data.scenario);
  return l;
}

std::string num(double v, const char* pattern = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct RunFlags {
  std::string scenario;
  std::string mode = "day-ahead";
  double gap = 1e-3;
  std::string out;
  int lookahead = 4;
  bool strict = false;
  bool porcelain = false;
  bool verbose = false;
  int jobs = 1;
};

RunOptions options_of(const RunFlags& f) {
  RunOptions o;
  o.solver.rel_gap = f.gap;
  o.lookahead = f.lookahead;
  o.strict = f.strict;
  o.jobs = f.jobs;
  return o;
}

fs::path output_dir(const RunFlags& f) {
  if (!f.out.empty()) return f.out;
  const char* root = std::getenv("GRIDSTACK_OUT");
  return fs::path(root && *root ? root : "gridstack-out") / fs::path(f.scenario).stem();
}

void emit_logs(const RunFlags& f, const std::vector<std::string>& log) {
  if (!f.verbose) return;
  for (const auto& line : log) std::cerr << line << '\n';
}

// One row per reported schedule: mode, stage, cost, curtailment and the
// heaviest monitored line loading in percent.
struct Row {
  std::string mode, stage;
  const ScheduleSet* s;
};

void print_rows(const RunFlags& f, const NetworkModel& net, const std::vector<Row>& rows) {
  auto loading = [&](const ScheduleSet& s) {
    double worst = 0.0;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      if (!net.lines[l].monitored) continue;
      for (double v : s.flow[l]) worst = std::max(worst, std::abs(v) / net.lines[l].flow_max);
    }
    return 100.0 * worst;
  };
  if (f.porcelain) {
    std::cout << "mode\tstage\toperating_cost\tcurtailed_mwh\tmax_loading_pct\n";
    for (const Row& r : rows)
      std::cout << r.mode << '\t' << r.stage << '\t' << num(r.s->operating_cost(), "%.6f") << '\t'
                << num(r.s->curtailed_energy, "%.6f") << '\t' << num(loading(*r.s), "%.4f") << '\n';
    return;
  }
  std::printf("%-11s %-10s %14s %14s %12s\n", "mode", "stage", "cost ($)", "curtailed MWh", "max loading");
  for (const Row& r : rows)
    std::printf("%-11s %-10s %14.2f %14.3f %11.1f%%\n", r.mode.c_str(), r.stage.c_str(), r.s->operating_cost(),
                r.s->curtailed_energy, loading(*r.s));
}

int cmd_run(const RunFlags& f) {
  const Loaded in = load(f.scenario);
  const fs::path target = output_dir(f);
  cli::ArtifactDir dir(target);
  const RunOptions opts = options_of(f);
  const bool want_ha = f.mode != "day-ahead";

  std::vector<Row> rows;
  const DayAheadResult da = run_day_ahead(in.net, in.scen, in.depo, opts);
  emit_logs(f, da.log);
  const std::pair<std::string, const StageResult*> stages[] = {
      {"stage1", &da.stage1}, {"stage2", &da.stage2}, {"stage3", &da.stage3}, {"stage4", &da.stage4}};
  if (f.mode != "hour-ahead") {
    const fs::path base = dir.path() / "day-ahead";
    for (const auto& [name, r] : stages) write_schedule_csv(r->schedule, da.tepo_network, base / name);
    cli::write_text(base / "transcript.log", cli::transcript_text(da.tepo_network, da.transcripts));
    cli::write_text(base / "summary.tsv", cli::stage_summary_tsv({std::begin(stages), std::end(stages)}));
    cli::write_text(base / "net_load.csv", cli::net_load_csv(da.tepo_network, in.scen, da.stage4.schedule));
    rows.push_back({"day-ahead", "stage1", &da.stage1.schedule});
    rows.push_back({"day-ahead", "stage4", &da.stage4.schedule});
  }

  HourAheadResult ha;
  if (want_ha) {
    ha = run_hour_ahead(in.net, in.scen, da, in.depo, opts);
    emit_logs(f, ha.log);
    const fs::path base = dir.path() / "hour-ahead";
    write_schedule_csv(ha.committed, da.tepo_network, base / "committed");
    cli::write_text(base / "transcript.log", cli::transcript_text(da.tepo_network, ha.transcripts));
    cli::write_text(base / "net_load.csv", cli::net_load_csv(da.tepo_network, in.scen, ha.committed));
    rows.push_back({"hour-ahead", "committed", &ha.committed});
  }

  nlohmann::json manifest = {{"tool", "gridstack"},
                             {"command", "run"},
                             {"scenario", fs::path(f.scenario).filename().string()},
                             {"scenario_fnv1a64", cli::fnv1a_hex(in.bytes)},
                             {"mode", f.mode},
                             {"gap", f.gap},
                             {"lookahead", f.lookahead},
                             {"strict", f.strict}};
  dir.commit(std::move(manifest));
  print_rows(f, da.tepo_network, rows);
  if (!f.porcelain) std::printf("artifacts: %s\n", target.string().c_str());
  return kExitOk;
}

int cmd_benchmark(const RunFlags& f) {
  const Loaded in = load(f.scenario);
  if (in.net.storage.empty()) throw ValidationError("storage", "benchmark needs at least one storage device");
  const BenchmarkResult b = run_benchmark(in.net, in.scen, in.depo, options_of(f));
  emit_logs(f, b.log);
  const double nc = b.ncuc_plus_reduction();
  const double ms = b.multistage_reduction();
  const double gap = nc != 0.0 ? 100.0 * (nc - ms) / std::abs(nc) : 0.0;
  if (f.porcelain) {
    std::cout << "case\tcost\treduction\treduction_gap_pct\n"
              << "ncuc+_no_storage\t" << num(b.no_storage_cost, "%.6f") << "\t--\t--\n"
              << "ncuc+\t" << num(b.ncuc_plus_cost, "%.6f") << '\t' << num(nc, "%.6f") << "\t--\n"
              << "multistage\t" << num(b.multistage_cost, "%.6f") << '\t' << num(ms, "%.6f") << '\t'
              << num(gap, "%.4f") << '\n';
    return kExitOk;
  }
  std::printf("%-22s %14s %14s %14s\n", "case", "cost ($)", "reduction ($)", "reduction gap");
  std::printf("%-22s %14.2f %14s %14s\n", "NCUC+ without storage", b.no_storage_cost, "--", "--");
  std::printf("%-22s %14.2f %14.2f %14s\n", "NCUC+", b.ncuc_plus_cost, nc, "--");
  std::printf("%-22s %14.2f %14.2f %13.2f%%\n", "Multistage", b.multistage_cost, ms, gap);
  return kExitOk;
}

int cmd_validate(const RunFlags& f) {
  if (!fs::is_regular_file(f.scenario)) throw ParseError(f.scenario + ": no such file");
  const nlohmann::json doc = read_json_file(f.scenario);
  const ScenarioData data = parse_scenario(doc);
  const ValidationReport rep = validate(data.network, data.scenario);
  parse_depo_configs(doc, data.network);
  for (const auto& e : rep.errors)
    std::cout << (f.porcelain ? "error\t" : "error: ") << e.field << (f.porcelain ? "\t" : ": ") << e.message << '\n';
  for (const auto& w : rep.warnings)
    std::cout << (f.porcelain ? "warning\t" : "warning: ") << w.field << (f.porcelain ? "\t" : ": ") << w.message
              << '\n';
  std::cout << rep.errors.size() << " errors, " << rep.warnings.size() << " warnings\n";
  return rep.ok() ? kExitOk : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistage transmission/distribution storage sharing"};
  app.require_subcommand(1);
  RunFlags flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("scenario", flags.scenario, "Scenario JSON file")->required();
    sub->add_option("--gap", flags.gap, "Relative MILP gap")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--jobs", flags.jobs, "Threads for independent solves")->check(CLI::PositiveNumber);
    sub->add_option("--lookahead", flags.lookahead, "Hour-ahead window length in intervals")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--strict", flags.strict, "Abort when an owner cannot meet the mitigation needs");
    sub->add_flag("--porcelain", flags.porcelain, "Tab-separated output for scripts");
    sub->add_flag("-v,--verbose", flags.verbose, "Stage and owner log lines on stderr");
  };

  CLI::App* run = app.add_subcommand("run", "Run the pipeline and write artifacts");
  common(run);
  run->add_option("--mode", flags.mode, "day-ahead, hour-ahead or both")
      ->check(CLI::IsMember({"day-ahead", "hour-ahead", "both"}))
      ->capture_default_str();
  run->add_option("--out", flags.out, "Artifact directory (default $GRIDSTACK_OUT/<scenario>)");

  CLI::App* bench = app.add_subcommand("benchmark", "Compare the multistage result with co-optimized storage");
  common(bench);

  CLI::App* val = app.add_subcommand("validate", "Check a scenario file");
  val->add_option("scenario", flags.scenario, "Scenario JSON file")->required();
  val->add_flag("--porcelain", flags.porcelain, "Tab-separated output for scripts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run) return cmd_run(flags);
    if (*bench) return cmd_benchmark(flags);
    return cmd_validate(flags);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InfeasibleScheduleError& e) {
    std::cerr << "error: depo: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const SolveError& e) {
    std::cerr << "error: solve: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
