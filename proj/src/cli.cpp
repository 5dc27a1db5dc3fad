#include "sdx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdx/bench.hpp"
#include "sdx/bqpwalk.hpp"
#include "sdx/errors.hpp"
#include "sdx/instance_io.hpp"
#include "sdx/quadmodel.hpp"
#include "sdx/shorlift.hpp"

namespace sdx::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised to leave a command with a specific code after printing a message.
struct Exit {
  int code;
  std::string message;
};

struct Config {
  std::string instance;
  std::string inline_spec;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::string start;
  std::string x;
  std::size_t trials = 0;
  std::string ns;
  std::size_t M = 0;
  std::string log_base = "natural";
  double pd_tol = 1e-9;
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  std::string out;
  std::string format = "json";
  std::size_t threads = 0;
  bool audit = false;
};

void check_tolerances(const Config& c) {
  if (!(c.pd_tol > 0.0) || !(c.gap_tol > 0.0) || !(c.feas_tol > 0.0))
    throw UsageError("tolerances must be > 0");
}

io::AnyInstance load_instance(const Config& c) {
  const int sources = !c.instance.empty() + !c.inline_spec.empty();
  if (sources > 1) throw UsageError("--instance and --inline are mutually exclusive");
  if (sources == 1) {
    io::AnyInstance inst = !c.instance.empty() ? io::read_instance_file(c.instance)
                                               : io::AnyInstance(io::parse_inline(c.inline_spec));
    // With an explicit instance, --n only cross-checks the size.
    const std::size_t n = std::visit([](const auto& i) { return i.n(); }, inst);
    if (c.n && *c.n != n)
      throw io::ParseError("--n " + std::to_string(*c.n) + " does not match instance size " +
                           std::to_string(n));
    return inst;
  }
  if (!c.n) throw UsageError("give --instance, --inline, or --n with --seed");
  if (*c.n < 1) throw UsageError("--n must be >= 1");
  if (!c.seed) throw UsageError("--n requires --seed");
  return bench::random_instance(*c.n, *c.seed);
}

bqp::BqpInstance load_bqp(const Config& c) {
  auto inst = load_instance(c);
  if (auto* b = std::get_if<bqp::BqpInstance>(&inst)) return std::move(*b);
  throw io::ParseError("this command needs a BQP instance ({\"n\", \"c\", \"coff\"})");
}

std::string degenerate_message(const bqp::Degenerate& d) {
  std::ostringstream os;
  os << "degenerate cone value " << d.value << " at coordinate " << d.coordinate
     << " of vertex " << d.at.to_string();
  return os.str();
}

json trace_json(const bqp::WalkTrace& t) {
  return {{"start", t.start.to_string()},
          {"flips", t.flips},
          {"final", t.final_vertex.bits()},
          {"iterations", t.iterations()}};
}

Vector parse_point(const std::string& s, std::size_t n) {
  if (s.empty()) throw UsageError("--x is required");
  std::vector<double> v;
  if (s.find_first_not_of("+-") == std::string::npos) {
    for (char ch : s) v.push_back(ch == '+' ? 1.0 : -1.0);
  } else {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw io::ParseError("--x: bad number '" + tok + "'");
      }
    }
  }
  if (v.size() != n)
    throw io::ParseError("--x: expected " + std::to_string(n) + " entries, got " +
                         std::to_string(v.size()));
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::size_t> parse_ns(const std::string& s) {
  if (s.empty()) throw UsageError("--ns is required");
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.empty() || v < 1) throw UsageError("--ns: bad size '" + tok + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw io::ParseError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw io::ParseError("write to '" + path.string() + "' failed");
}

int cmd_walk(const Config& c, std::ostream& out) {
  const auto inst = load_bqp(c);
  const bqp::SignVector x0 = c.start.empty() ? bqp::SignVector(inst.n())
                                             : bqp::SignVector::parse(c.start);
  if (x0.size() != inst.n())
    throw io::ParseError("--start: expected " + std::to_string(inst.n()) + " signs");
  const auto res = bqp::walk(inst, x0);
  if (const auto* d = std::get_if<bqp::Degenerate>(&res)) throw Exit{kDomainError, degenerate_message(*d)};
  if (const auto* b = std::get_if<bqp::IterationBudgetExceeded>(&res)) {
    out << trace_json(b->partial).dump() << "\n";
    throw Exit{kPartial, "iteration budget exceeded"};
  }
  const auto& t = std::get<bqp::WalkTrace>(res);
  out << trace_json(t).dump() << "\n";
  out << "p_x " << std::setprecision(17) << bqp::bqp_value(inst, t.final_vertex) << "\n";
  return kOk;
}

int cmd_multistart(const Config& c, std::ostream& out) {
  const auto inst = load_bqp(c);
  const std::size_t M = c.M > 0 ? c.M : bench::resolve_M(inst.n(), {});
  const auto res = bqp::multistart(inst, M, c.seed.value_or(0));
  if (const auto* d = std::get_if<bqp::Degenerate>(&res)) throw Exit{kDomainError, degenerate_message(*d)};
  const auto& m = std::get<bqp::MultistartResult>(res);
  json j{{"M", M}, {"best", m.best.bits()}, {"p_best", m.p_best}};
  j["members"] = json::array();
  for (const auto& v : m.members) j["members"].push_back(v.bits());
  j["iterations"] = json::array();
  for (const auto& t : m.traces) j["iterations"].push_back(t.iterations());
  out << j.dump() << "\n";
  return kOk;
}

int cmd_shor(const Config& c, std::ostream& out) {
  check_tolerances(c);
  const auto q = io::as_qcqp(load_instance(c));
  q.validate();
  sdp::SolveOptions so;
  so.tol_gap = c.gap_tol;
  so.tol_feas = c.feas_tol;
  const auto sol = sdp::solve(shor::build_shor_sdp(q), so);
  json j{{"status", sdp::to_string(sol.status)},
         {"primal", sol.primal_value},
         {"dual", sol.dual_value},
         {"gap", sol.gap},
         {"iterations", sol.iterations}};
  if (sol.status == sdp::Status::Optimal) {
    const auto r1 = shor::extract_rank1(sol.X);
    j["rank1"] = std::holds_alternative<Vector>(r1);
    if (const auto* x = std::get_if<Vector>(&r1)) {
      j["x"] = std::vector<double>(x->data(), x->data() + x->size());
    } else {
      j["eig_ratio"] = std::get<shor::NotRankOne>(r1).ratio;
    }
  }
  out << j.dump() << "\n";
  if (sol.status != sdp::Status::Optimal) throw Exit{kNumericError, "solver: " + sol.message};
  return kOk;
}

int cmd_certify(const Config& c, std::ostream& out) {
  check_tolerances(c);
  const auto q = io::as_qcqp(load_instance(c));
  q.validate();
  const Vector x = parse_point(c.x, q.n());
  CertifyOptions co;
  co.feas_tol = c.feas_tol;
  co.margin_tol = c.pd_tol;
  const auto res = certify_membership(q, x, co);
  json j;
  if (const auto* cert = std::get_if<ExactnessCertificate>(&res)) {
    j = {{"certified", true},
         {"lambda", std::vector<double>(cert->lambda.data(),
                                        cert->lambda.data() + cert->lambda.size())},
         {"margin", cert->min_eig_H}};
  } else {
    const auto& nc = std::get<NotCertified>(res);
    j = {{"certified", false}, {"reason", to_string(nc.reason)}, {"detail", nc.detail}};
    if (std::isfinite(nc.margin)) j["margin"] = nc.margin;
  }
  out << j.dump() << "\n";
  return kOk;
}

bench::RunOptions bench_options(const Config& c, std::ostream& err) {
  if (!c.seed) throw UsageError("bench requires --seed");
  if (c.trials < 1) throw UsageError("--trials must be >= 1");
  check_tolerances(c);
  bench::RunOptions o;
  o.threads = c.threads;
  o.audit = c.audit;
  o.sdp.tol_gap = c.gap_tol;
  o.sdp.tol_feas = c.feas_tol;
  o.progress = [&err](const std::string& line) { err << line << "\n"; };
  return o;
}

int cmd_table1(const Config& c, std::ostream& out, std::ostream& err) {
  const auto ns = parse_ns(c.ns);
  const auto opts = bench_options(c, err);
  const auto res = bench::run_table1(ns, c.trials, *c.seed, opts);
  const std::filesystem::path dir = c.out.empty() ? "." : c.out;
  std::filesystem::create_directories(dir);
  std::ostringstream t1;
  std::ostringstream tr;
  bench::write_table1_csv(t1, res.rows);
  bench::write_trials_csv(tr, res.trials);
  write_file(dir / "table1.csv", t1.str());
  write_file(dir / "trials.csv", tr.str());
  out << t1.str();
  out << "excluded " << res.excluded << ", walks longer than 2n " << res.conjecture_violations
      << "\n";
  return res.excluded > 0 ? kPartial : kOk;
}

int cmd_table2(const Config& c, std::ostream& out, std::ostream& err) {
  const auto ns = parse_ns(c.ns);
  const auto opts = bench_options(c, err);
  bench::MRule rule;
  rule.fixed = c.M;
  if (c.log_base == "natural") rule.base = bench::LogBase::Natural;
  else if (c.log_base == "base2") rule.base = bench::LogBase::Base2;
  else if (c.log_base == "base10") rule.base = bench::LogBase::Base10;
  else throw UsageError("--log-base must be natural, base2 or base10");
  const auto res = bench::run_table2(ns, c.trials, rule, *c.seed, opts);
  const std::filesystem::path dir = c.out.empty() ? "." : c.out;
  std::filesystem::create_directories(dir);
  std::ostringstream t2;
  std::ostringstream tr;
  bench::write_table2_csv(t2, res.rows);
  bench::write_trials_csv(tr, res.trials);
  write_file(dir / "table2.csv", t2.str());
  write_file(dir / "trials.csv", tr.str());
  out << "# log base " << bench::to_string(res.log_base) << "\n" << t2.str();
  std::size_t failed = 0;
  for (const auto& r : res.rows) {
    failed += r.failed_count;
    if (r.out_of_range_count > 0)
      out << "n=" << r.n << ": " << r.out_of_range_count << " trials with D outside [0, 0.5]\n";
  }
  return failed > 0 ? kPartial : kOk;
}

int cmd_graph(const Config& c, std::ostream& out) {
  const auto inst = load_bqp(c);
  const auto res = bqp::orient_hypercube(inst);
  if (const auto* d = std::get_if<bqp::Degenerate>(&res)) throw Exit{kDomainError, degenerate_message(*d)};
  const auto& g = std::get<bqp::HypercubeOrientation>(res);
  std::string sinks;
  for (auto v : g.sinks()) {
    if (!sinks.empty()) sinks += ' ';
    sinks += bqp::SignVector::from_mask(g.n(), v).to_string();
  }
  const std::string summary = "sinks: " + sinks + "\nacyclic: " +
                              (g.is_acyclic() ? "true" : "false") + "\n";
  if (c.out.empty()) {
    out << g.to_dot() << "// " << summary.substr(0, summary.find('\n')) << "\n// "
        << summary.substr(summary.find('\n') + 1);
  } else {
    write_file(c.out, g.to_dot());
    out << summary;
  }
  return kOk;
}

int cmd_emit(const Config& c, std::ostream& out) {
  const std::string text = io::to_json(load_instance(c)) + "\n";
  if (c.out.empty()) out << text;
  else write_file(c.out, text);
  return kOk;
}

void add_instance_flags(CLI::App* app, Config& c) {
  app->add_option("--instance", c.instance, "Instance JSON file");
  app->add_option("--inline", c.inline_spec, "BQP instance, e.g. \"c=5,-1;coff=3\"");
  app->add_option("--n", c.n, "Size of a random N(0,1) instance (needs --seed)");
  app->add_option("--seed", c.seed, "Random seed");
}

void add_tolerance_flags(CLI::App* app, Config& c) {
  app->add_option("--pd-tol", c.pd_tol, "Relative margin for positive definiteness");
  app->add_option("--gap-tol", c.gap_tol, "SDP relative gap tolerance");
  app->add_option("--feas-tol", c.feas_tol, "Feasibility tolerance");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shor relaxation exactness tools for quadratic programs", "sdx"};
  app.require_subcommand(1);
  Config c;

  auto* walk = app.add_subcommand("walk", "Cone walk from a start vertex");
  add_instance_flags(walk, c);
  walk->add_option("--start", c.start, "Start vertex as +/- string (default all +)");

  auto* ms = app.add_subcommand("multistart", "Best endpoint of M walks from random starts");
  add_instance_flags(ms, c);
  ms->add_option("--M", c.M, "Number of starts (default ceil(ln n))");

  auto* shor = app.add_subcommand("shor", "Solve the Shor relaxation");
  add_instance_flags(shor, c);
  add_tolerance_flags(shor, c);

  auto* cert = app.add_subcommand("certify", "Exactness certificate at a feasible point");
  add_instance_flags(cert, c);
  add_tolerance_flags(cert, c);
  cert->add_option("--x", c.x, "Point, as +/- string or comma-separated numbers");

  auto* bench = app.add_subcommand("bench", "Benchmark tables");
  bench->require_subcommand(1);
  auto* t1 = bench->add_subcommand("table1", "Walk iteration statistics");
  auto* t2 = bench->add_subcommand("table2", "Walk, multistart and SDP comparison");
  for (auto* sub : {t1, t2}) {
    sub->add_option("--ns", c.ns, "Comma-separated sizes")->required();
    sub->add_option("--trials", c.trials, "Trials per size")->required();
    sub->add_option("--seed", c.seed, "Base seed");
    sub->add_option("--out", c.out, "Output directory for CSV files");
    sub->add_option("--threads", c.threads, "Worker threads (default SDX_THREADS or all cores)");
    add_tolerance_flags(sub, c);
  }
  t2->add_option("--M", c.M, "Fixed number of starts (default ceil(log n))");
  t2->add_option("--log-base", c.log_base, "natural, base2 or base10");
  t2->add_flag("--audit", c.audit, "Brute-force the optimum for n <= 16");

  auto* graph = app.add_subcommand("graph", "Oriented hypercube as DOT");
  add_instance_flags(graph, c);
  graph->add_option("--out", c.out, "DOT output file");

  auto* emit = app.add_subcommand("emit-instance", "Write an instance as JSON");
  add_instance_flags(emit, c);
  emit->add_option("--out", c.out, "Output file");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (walk->parsed()) return cmd_walk(c, out);
    if (ms->parsed()) return cmd_multistart(c, out);
    if (shor->parsed()) return cmd_shor(c, out);
    if (cert->parsed()) return cmd_certify(c, out);
    if (t1->parsed()) return cmd_table1(c, out, err);
    if (t2->parsed()) return cmd_table2(c, out, err);
    if (graph->parsed()) return cmd_graph(c, out);
    if (emit->parsed()) return cmd_emit(c, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const InfeasiblePoint& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const TooLarge& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const SingularTransform& e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return kNumericError;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsage;
}

}  // namespace sdx::cli
