#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "atmsim/replication.hpp"
#include "verify.hpp"

namespace {

using namespace atmsim;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<double> demand;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
};

ScenarioConfig resolve_config(const CommonOpts& o) {
  ScenarioConfig cfg = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
  if (o.demand) cfg.demand_vph = *o.demand;
  if (o.reps) cfg.replications = *o.reps;
  if (o.seed) cfg.master_seed = *o.seed;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Scenario config file (JSON)");
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--demand", o.demand, "Demand override (vph)");
  cmd->add_option("--reps", o.reps, "Replication count override");
  cmd->add_option("--seed", o.seed, "Master seed override");
  cmd->add_option("--jobs", o.jobs, "Worker threads for replications");
}

int cmd_run(const CommonOpts& o, const std::string& case_name) {
  const ScenarioConfig cfg = resolve_config(o);
  const CaseId case_id = case_from_string(case_name);
  std::filesystem::create_directories(o.out_dir);
  auto results = run_case(cfg, case_id, cfg.replications, o.jobs, o.out_dir);
  std::array<std::vector<ReplicationResult>, 4> all;
  all[static_cast<int>(case_id)] = results;
  // single-case CSV: only the requested case's rows
  std::string csv = "case,rep_index,seed,mean_speed_mph,alerts,attacks\n";
  for (const auto& r : results) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%d,%llu,%.17g,%ld,%ld\n", to_string(r.case_id),
                  r.rep_index, static_cast<unsigned long long>(r.seed), r.mean_speed_mph,
                  r.alerts, r.attacks);
    csv += buf;
  }
  atomic_write_file(o.out_dir + "/replications.csv", csv);
  atomic_write_file(o.out_dir + "/config.json", cfg.to_json().dump(2) + "\n");
  double mean = 0.0;
  for (const auto& r : results) mean += r.mean_speed_mph;
  mean /= results.size();
  std::printf("%s: %zu replications, mean speed %.2f mph\n", case_name.c_str(),
              results.size(), mean);
  return 0;
}

int cmd_table1(const CommonOpts& o) {
  const ScenarioConfig cfg = resolve_config(o);
  if (cfg.replications < 10)
    std::fprintf(stderr, "warning: only %d replications; comparison power is low\n",
                 cfg.replications);
  const Table1Output out = run_table1(cfg, o.jobs, o.out_dir);
  std::fputs(render_report_text(out.report).c_str(), stdout);
  std::printf("written: %s/replications.csv, report.json, report.txt\n", o.out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& csv_path, const std::string& out_dir) {
  const auto results = read_replications_csv(csv_path);
  const ComparisonReport report = build_report(results);
  std::fputs(render_report_text(report).c_str(), stdout);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    atomic_write_file(out_dir + "/report.json", report_to_json(report).dump(2) + "\n");
    atomic_write_file(out_dir + "/report.txt", render_report_text(report));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Freeway lane-control simulator with attack injection and dual-channel monitoring"};
  app.require_subcommand(1);

  CommonOpts run_opts, table_opts, verify_opts;
  std::string case_name = "baseline";
  std::string report_csv, report_out;

  CLI::App* run = app.add_subcommand("run", "Run one case");
  add_common(run, run_opts);
  run->add_option("--case", case_name, "baseline, case1, case2 or case3");

  CLI::App* table1 = app.add_subcommand("table1", "Run the four-case comparison experiment");
  add_common(table1, table_opts);

  CLI::App* verify = app.add_subcommand("verify", "Run the built-in oracle suite");
  verify->add_option("--config", verify_opts.config_path, "Scenario config file (JSON)");

  CLI::App* report = app.add_subcommand("report", "Rebuild the comparison report from a CSV");
  report->add_option("--in", report_csv, "replications.csv path")->required();
  report->add_option("--out-dir", report_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts, case_name);
    if (table1->parsed()) return cmd_table1(table_opts);
    if (verify->parsed()) {
      const ScenarioConfig cfg = resolve_config(verify_opts);
      return atmsim::tools::run_verify(cfg) == 0 ? 0 : 1;
    }
    if (report->parsed()) return cmd_report(report_csv, report_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
