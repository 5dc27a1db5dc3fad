#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdx/bqpwalk.hpp"
#include "sdx/sdpcore.hpp"

namespace sdx::bench {

/// c_i and c_ij (i < j) i.i.d. N(0, 1) from mt19937_64(seed): off-diagonals
/// first, then the linear part. Zero diagonal.
bqp::BqpInstance random_instance(std::size_t n, std::uint64_t seed);

struct DValue {
  double value = 0.0;
  bool both_zero = false;
  bool out_of_range = false;  // outside [0, 1/2]
};

/// (p_x - p_sdp) / ((|p_x| + |p_sdp|) / 2); 0 with both_zero set when both vanish.
DValue metric_D_checked(double p_x, double p_sdp);
double metric_D(double p_x, double p_sdp);

struct TrialRecord {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;  // flips of the single-start walk
  std::size_t walk_steps = 0;  // cone evaluations: flips + 1
  double time_walk_s = 0.0;
  double time_multistart_s = 0.0;
  double time_sdp_s = 0.0;
  double p_x = 0.0;
  double p_x_M = 0.0;
  double p_sdp = 0.0;
  double D_x = 0.0;
  double D_xM = 0.0;
  bool degenerate_flag = false;
  bool conjecture_2n_ok = true;
  std::size_t members_count = 0;
  bool sdp_failed = false;
  bool rank1 = false;
  bool has_brute_force = false;
  double p_star = 0.0;
  std::string note;
};

struct StatsSummary {
  std::size_t n = 0;
  std::size_t trials = 0;
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double sigma = 0.0;  // sample standard deviation
  double sigma_sq = 0.0;
};

/// Throws InvalidInput on an empty sample.
StatsSummary summarize(std::size_t n, const std::vector<double>& sample);

struct RunOptions {
  std::size_t threads = 0;  // 0: SDX_THREADS, else hardware concurrency
  bool audit = false;       // brute-force p* for n <= 16
  sdp::SolveOptions sdp;
  std::function<void(const std::string&)> progress;
};

struct Table1Result {
  std::vector<StatsSummary> rows;  // statistics of walk_steps
  std::vector<TrialRecord> trials;
  std::size_t excluded = 0;         // degenerate or over budget
  std::size_t conjecture_violations = 0;
};

Table1Result run_table1(const std::vector<std::size_t>& ns, std::size_t trials,
                        std::uint64_t base_seed, const RunOptions& opts = {});

enum class LogBase { Natural, Base2, Base10 };

const char* to_string(LogBase b);

struct MRule {
  std::size_t fixed = 0;  // nonzero overrides the log rule
  LogBase base = LogBase::Natural;
};

/// ceil(log n) in the chosen base, at least 1.
std::size_t resolve_M(std::size_t n, const MRule& rule);

struct Table2Row {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t M = 0;
  double time_px_s = 0.0;
  double time_pxM_s = 0.0;
  double time_psdp_s = 0.0;
  double D_px = 0.0;
  double D_pxM = 0.0;
  std::size_t rank1_count = 0;
  std::size_t failed_count = 0;
  std::size_t degenerate_count = 0;
  std::size_t out_of_range_count = 0;
};

struct Table2Result {
  std::vector<Table2Row> rows;
  std::vector<TrialRecord> trials;
  LogBase log_base = LogBase::Natural;
};

inline constexpr std::size_t kTable2MaxN = 300;

Table2Result run_table2(const std::vector<std::size_t>& ns, std::size_t trials,
                        const MRule& rule, std::uint64_t base_seed,
                        const RunOptions& opts = {});

/// Seed of trial `trial` at size n.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);

void write_table1_csv(std::ostream& os, const std::vector<StatsSummary>& rows);
void write_table2_csv(std::ostream& os, const std::vector<Table2Row>& rows);
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials);

/// Worker count: SDX_THREADS if set and positive, else hardware concurrency.
std::size_t default_threads();

}  // namespace sdx::bench
