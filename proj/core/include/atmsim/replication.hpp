#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "atmsim/config.hpp"
#include "atmsim/eventlog.hpp"
#include "atmsim/monitoring.hpp"
#include "atmsim/stats.hpp"
#include "atmsim/types.hpp"

namespace atmsim {

enum class CaseId : int { Baseline = 0, Case1 = 1, Case2 = 2, Case3 = 3 };

struct CaseFlags {
  bool atm = false;
  bool attacks = false;
  bool monitoring = false;
};

CaseFlags case_flags(CaseId id);
const char* to_string(CaseId id);
CaseId case_from_string(const std::string& name);

struct ReplicationResult {
  CaseId case_id = CaseId::Baseline;
  int rep_index = 0;
  std::uint64_t seed = 0;
  double mean_speed_mph = 0.0;
  long alerts = 0;
  long attacks = 0;
  std::string log_path;
};

/// Per-interval match bookkeeping captured for verification runs.
struct MatchRecord {
  int interval = 0;
  int gantry = 0;
  bool mismatch = false;
  std::vector<LaneState> displayed;
  std::vector<LaneState> monitoring;
};

struct ReplicationProbe {
  std::vector<MatchRecord> matches;
  long alerts = 0;
};

struct RunOptions {
  std::string log_path;          // empty: no event log
  bool monitoring_identity_mode = false;  // monitor fed the ATM channel's own samples
  ReplicationProbe* probe = nullptr;
};

ReplicationResult run_replication(const ScenarioConfig& config, CaseId case_id, int rep_index,
                                  const RunOptions& options = {});

/// Custom flag combination (verification harness).
ReplicationResult run_replication_flags(const ScenarioConfig& config, CaseFlags flags,
                                        CaseId label, int rep_index,
                                        const RunOptions& options = {});

/// n paired replications; may execute on `jobs` worker threads. Output is
/// ordered by rep_index and independent of scheduling.
std::vector<ReplicationResult> run_case(const ScenarioConfig& config, CaseId case_id, int n,
                                        int jobs = 1, const std::string& out_dir = "");

struct CaseStats {
  double mean = 0.0;
  double sd = 0.0;
};

struct PairComparison {
  double percent_change = 0.0;  // (mean_case - mean_ref) / mean_ref
  TTestResult test;
};

struct ComparisonReport {
  int replications = 0;
  std::array<CaseStats, 4> cases;
  // vs[c][r]: case c compared against reference case r, present for r < c
  std::array<std::array<std::optional<PairComparison>, 3>, 4> vs;
};

/// Requires all four cases with equal replication counts.
ComparisonReport build_report(const std::array<std::vector<ReplicationResult>, 4>& results);

std::string render_report_text(const ComparisonReport& report);
OrderedJson report_to_json(const ComparisonReport& report);

/// replications.csv I/O (fixed header, atomic write).
void write_replications_csv(const std::string& path,
                            const std::array<std::vector<ReplicationResult>, 4>& results);
std::array<std::vector<ReplicationResult>, 4> read_replications_csv(const std::string& path);

/// Writes `content` to `path` via temp file + rename.
void atomic_write_file(const std::string& path, const std::string& content);

struct Table1Output {
  std::array<std::vector<ReplicationResult>, 4> results;
  ComparisonReport report;
};

/// The four-case experiment with common random numbers; writes
/// replications.csv, report.json and report.txt under out_dir when given.
Table1Output run_table1(const ScenarioConfig& config, int jobs = 1,
                        const std::string& out_dir = "");

}  // namespace atmsim
