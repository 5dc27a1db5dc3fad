#include "sdx/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "sdx/errors.hpp"
#include "sdx/rng.hpp"
#include "sdx/shorlift.hpp"

namespace sdx::bench {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs body(k) for k in [0, count) on up to `threads` workers. Results are
// written by index, so the fold afterwards does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::size_t resolve_threads(const RunOptions& opts) {
  return opts.threads > 0 ? opts.threads : default_threads();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::size_t default_threads() {
  if (const char* env = std::getenv("SDX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

bqp::BqpInstance random_instance(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("random_instance: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> coff(n * (n - 1) / 2);
  for (double& v : coff) v = normal(rng);
  std::vector<double> c(n);
  for (double& v : c) v = normal(rng);
  return bqp::BqpInstance(std::move(c), std::move(coff));
}

DValue metric_D_checked(double p_x, double p_sdp) {
  DValue d;
  const double denom = 0.5 * (std::abs(p_x) + std::abs(p_sdp));
  if (denom == 0.0) {
    d.both_zero = true;
    return d;
  }
  d.value = (p_x - p_sdp) / denom;
  d.out_of_range = d.value < 0.0 || d.value > 0.5;
  return d;
}

double metric_D(double p_x, double p_sdp) { return metric_D_checked(p_x, p_sdp).value; }

StatsSummary summarize(std::size_t n, const std::vector<double>& sample) {
  if (sample.empty()) throw InvalidInput("summarize: empty sample");
  std::vector<double> s(sample);
  std::sort(s.begin(), s.end());
  StatsSummary out;
  out.n = n;
  out.trials = s.size();
  out.min = s.front();
  out.max = s.back();
  const std::size_t k = s.size();
  out.median = k % 2 == 1 ? s[k / 2] : 0.5 * (s[k / 2 - 1] + s[k / 2]);
  out.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double v : s) ss += (v - out.mean) * (v - out.mean);
  out.sigma_sq = k > 1 ? ss / static_cast<double>(k - 1) : 0.0;
  out.sigma = std::sqrt(out.sigma_sq);
  return out;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
  return derive_seed(derive_seed(base_seed, n), trial);
}

Table1Result run_table1(const std::vector<std::size_t>& ns, std::size_t trials,
                        std::uint64_t base_seed, const RunOptions& opts) {
  if (trials < 1) throw InvalidInput("run_table1: trials must be >= 1");
  if (ns.empty()) throw InvalidInput("run_table1: empty size list");
  Table1Result out;
  const std::size_t threads = resolve_threads(opts);
  for (std::size_t n : ns) {
    if (n < 1) throw InvalidInput("run_table1: n must be >= 1");
    std::vector<TrialRecord> recs(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
      TrialRecord& r = recs[t];
      r.n = n;
      r.trial = t;
      r.seed = trial_seed(base_seed, n, t);
      const auto inst = random_instance(n, derive_seed(r.seed, 0));
      std::mt19937_64 rng(derive_seed(r.seed, 1));
      const auto x0 = bqp::random_sign_vector(n, rng);
      const auto t0 = Clock::now();
      const auto res = bqp::walk(inst, x0);
      r.time_walk_s = seconds_since(t0);
      if (const auto* tr = std::get_if<bqp::WalkTrace>(&res)) {
        r.iterations = tr->iterations();
        r.walk_steps = r.iterations + 1;
        r.p_x = bqp::bqp_value(inst, tr->final_vertex);
        r.conjecture_2n_ok = r.iterations <= 2 * n;
      } else {
        r.degenerate_flag = std::holds_alternative<bqp::Degenerate>(res);
        r.note = r.degenerate_flag ? "degenerate" : "iteration budget exceeded";
      }
    });

    std::vector<double> steps;
    for (const auto& r : recs) {
      if (!r.note.empty()) {
        ++out.excluded;
        continue;
      }
      steps.push_back(static_cast<double>(r.walk_steps));
      if (!r.conjecture_2n_ok) ++out.conjecture_violations;
    }
    if (!steps.empty()) out.rows.push_back(summarize(n, steps));
    if (opts.progress) {
      opts.progress("table1 n=" + std::to_string(n) + " trials=" + std::to_string(trials) +
                    (steps.empty() ? "" : " mean=" + fmt("%.2f", out.rows.back().mean)));
    }
    out.trials.insert(out.trials.end(), recs.begin(), recs.end());
  }
  return out;
}

const char* to_string(LogBase b) {
  switch (b) {
    case LogBase::Natural: return "natural";
    case LogBase::Base2: return "base2";
    case LogBase::Base10: return "base10";
  }
  return "unknown";
}

std::size_t resolve_M(std::size_t n, const MRule& rule) {
  if (rule.fixed > 0) return rule.fixed;
  if (n < 1) throw InvalidInput("resolve_M: n must be >= 1");
  const double x = static_cast<double>(n);
  double l = 0.0;
  switch (rule.base) {
    case LogBase::Natural: l = std::log(x); break;
    case LogBase::Base2: l = std::log2(x); break;
    case LogBase::Base10: l = std::log10(x); break;
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(l - 1e-12)));
}

Table2Result run_table2(const std::vector<std::size_t>& ns, std::size_t trials,
                        const MRule& rule, std::uint64_t base_seed,
                        const RunOptions& opts) {
  if (trials < 1) throw InvalidInput("run_table2: trials must be >= 1");
  if (ns.empty()) throw InvalidInput("run_table2: empty size list");
  for (std::size_t n : ns)
    if (n < 1 || n > kTable2MaxN)
      throw TooLarge("run_table2: n = " + std::to_string(n) + " outside [1, " +
                     std::to_string(kTable2MaxN) + "]");
  Table2Result out;
  out.log_base = rule.base;
  const std::size_t threads = resolve_threads(opts);

  for (std::size_t n : ns) {
    const std::size_t M = resolve_M(n, rule);
    std::vector<TrialRecord> recs(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
      TrialRecord& r = recs[t];
      r.n = n;
      r.trial = t;
      r.seed = trial_seed(base_seed, n, t);
      const auto inst = random_instance(n, derive_seed(r.seed, 0));

      // Start k of the multistart uses stream 1 + k; the single walk is start 0.
      auto t0 = Clock::now();
      std::mt19937_64 rng(derive_seed(r.seed, 1));
      const auto wres = bqp::walk(inst, bqp::random_sign_vector(n, rng));
      r.time_walk_s = seconds_since(t0);
      const auto* tr = std::get_if<bqp::WalkTrace>(&wres);
      if (!tr) {
        r.degenerate_flag = std::holds_alternative<bqp::Degenerate>(wres);
        r.note = r.degenerate_flag ? "degenerate" : "iteration budget exceeded";
        return;
      }
      r.iterations = tr->iterations();
      r.walk_steps = r.iterations + 1;
      r.conjecture_2n_ok = r.iterations <= 2 * n;
      r.p_x = bqp::bqp_value(inst, tr->final_vertex);

      t0 = Clock::now();
      bqp::MultistartResult ms;
      {
        std::vector<bqp::SignVector> ends;
        double best = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
          std::mt19937_64 rk(derive_seed(r.seed, 1 + k));
          const auto res = bqp::walk(inst, bqp::random_sign_vector(n, rk));
          const auto* trk = std::get_if<bqp::WalkTrace>(&res);
          if (!trk) {
            r.degenerate_flag = std::holds_alternative<bqp::Degenerate>(res);
            r.note = r.degenerate_flag ? "degenerate" : "iteration budget exceeded";
            return;
          }
          const double v = bqp::bqp_value(inst, trk->final_vertex);
          if (std::find(ends.begin(), ends.end(), trk->final_vertex) == ends.end())
            ends.push_back(trk->final_vertex);
          if (k == 0 || v < best) best = v;
        }
        r.p_x_M = best;
        r.members_count = ends.size();
      }
      r.time_multistart_s = seconds_since(t0);

      t0 = Clock::now();
      sdp::SdpSolution sol;
      try {
        sol = sdp::solve(shor::build_shor_sdp(inst.to_qcqp()), opts.sdp);
      } catch (const NumericalFailure& e) {
        sol.status = sdp::Status::NumericalFailure;
        sol.message = e.what();
      }
      r.time_sdp_s = seconds_since(t0);
      if (sol.status != sdp::Status::Optimal) {
        r.sdp_failed = true;
        r.note = std::string("sdp: ") + sdp::to_string(sol.status) +
                 (sol.message.empty() ? "" : " (" + sol.message + ")");
        return;
      }
      r.p_sdp = sol.dual_value;
      r.rank1 = std::holds_alternative<Vector>(shor::extract_rank1(sol.X));
      r.D_x = metric_D(r.p_x, r.p_sdp);
      r.D_xM = metric_D(r.p_x_M, r.p_sdp);
      if (opts.audit && n <= 16) {
        r.has_brute_force = true;
        r.p_star = bqp::brute_force_min(inst).value;
      }
    });

    Table2Row row;
    row.n = n;
    row.trials = trials;
    row.M = M;
    std::size_t used = 0;
    for (const auto& r : recs) {
      if (r.degenerate_flag) ++row.degenerate_count;
      if (!r.note.empty()) {
        ++row.failed_count;
        continue;
      }
      ++used;
      row.time_px_s += r.time_walk_s;
      row.time_pxM_s += r.time_multistart_s;
      row.time_psdp_s += r.time_sdp_s;
      row.D_px += r.D_x;
      row.D_pxM += r.D_xM;
      if (r.rank1) ++row.rank1_count;
      if (metric_D_checked(r.p_x, r.p_sdp).out_of_range ||
          metric_D_checked(r.p_x_M, r.p_sdp).out_of_range)
        ++row.out_of_range_count;
    }
    if (used > 0) {
      const auto u = static_cast<double>(used);
      row.time_px_s /= u;
      row.time_pxM_s /= u;
      row.time_psdp_s /= u;
      row.D_px /= u;
      row.D_pxM /= u;
    }
    if (opts.progress) {
      opts.progress("table2 n=" + std::to_string(n) + " M=" + std::to_string(M) +
                    " D_px=" + fmt("%.4g", row.D_px) + " D_pxM=" + fmt("%.4g", row.D_pxM) +
                    " failed=" + std::to_string(row.failed_count));
    }
    out.rows.push_back(row);
    out.trials.insert(out.trials.end(), recs.begin(), recs.end());
  }
  return out;
}

void write_table1_csv(std::ostream& os, const std::vector<StatsSummary>& rows) {
  os << "n,trials,max,min,mean,median,sigma,sigma_sq\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.trials << ',' << fmt("%g", r.max) << ',' << fmt("%g", r.min) << ','
       << fmt("%.2f", r.mean) << ',' << fmt("%g", r.median) << ',' << fmt("%.2f", r.sigma)
       << ',' << fmt("%.2f", r.sigma_sq) << '\n';
  }
}

void write_table2_csv(std::ostream& os, const std::vector<Table2Row>& rows) {
  os << "n,trials,M,time_px_s,time_pxM_s,time_psdp_s,D_px,D_pxM,rank1_count,failed_count\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.trials << ',' << r.M << ',' << fmt("%.3f", r.time_px_s) << ','
       << fmt("%.3f", r.time_pxM_s) << ',' << fmt("%.3f", r.time_psdp_s) << ','
       << fmt("%.4g", r.D_px) << ',' << fmt("%.4g", r.D_pxM) << ',' << r.rank1_count << ','
       << r.failed_count << '\n';
  }
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials) {
  os << "n,trial,seed,iterations,walk_steps,time_walk_s,time_multistart_s,time_sdp_s,"
        "p_x,p_x_M,p_sdp,D_x,D_xM,degenerate_flag,conjecture_2n_ok,members_count,"
        "sdp_failed,rank1,note\n";
  for (const auto& r : trials) {
    os << r.n << ',' << r.trial << ',' << r.seed << ',' << r.iterations << ','
       << r.walk_steps << ',' << fmt("%.6g", r.time_walk_s) << ','
       << fmt("%.6g", r.time_multistart_s) << ',' << fmt("%.6g", r.time_sdp_s) << ','
       << fmt("%.17g", r.p_x) << ',' << fmt("%.17g", r.p_x_M) << ','
       << fmt("%.17g", r.p_sdp) << ',' << fmt("%.17g", r.D_x) << ','
       << fmt("%.17g", r.D_xM) << ',' << r.degenerate_flag << ',' << r.conjecture_2n_ok
       << ',' << r.members_count << ',' << r.sdp_failed << ',' << r.rank1 << ','
       << r.note << '\n';
  }
}

}  // namespace sdx::bench
