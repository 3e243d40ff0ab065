// Command-line front end: worst-case SDP sweeps, single RPPA runs, the
// lower-bound certificate, the property suite, and triplet export.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rppa/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitBadArgs = 2;
constexpr int kExitSolverFail = 3;

struct NRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

// Accepts "7" or "1..10".
NRange parse_n_range(const std::string& text) {
  NRange r;
  const auto pos = text.find("..");
  try {
    if (pos == std::string::npos) {
      r.lo = r.hi = std::stoul(text);
    } else {
      r.lo = std::stoul(text.substr(0, pos));
      r.hi = std::stoul(text.substr(pos + 2));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("--n", "expected <int> or <lo>..<hi>");
  }
  if (r.lo < 1 || r.hi < r.lo)
    throw CLI::ValidationError("--n", "require 1 <= lo <= hi");
  return r;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw CLI::ValidationError("--out", "cannot open " + path);
  return file;
}

void emit_reports(std::ostream& os, const std::vector<rppa::RateReport>& rows,
                  const std::string& format) {
  if (format == "json") {
    os << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      os << "  {\"N\": " << r.n_steps << ", \"lambda\": " << fmt(r.lambda)
         << ", \"eps_pep\": " << fmt(r.eps_pep)
         << ", \"bound_classic\": " << fmt(r.classic)
         << ", \"bound_optimal\": " << fmt(r.optimal)
         << ", \"lower_example\": " << fmt(r.lower_example)
         << ", \"abs_gap\": " << fmt(r.abs_gap)
         << ", \"rel_gap\": " << fmt(r.rel_gap) << "}"
         << (i + 1 < rows.size() ? "," : "") << "\n";
    }
    os << "]\n";
    return;
  }
  os << "N,lambda,eps_pep,bound_classic,bound_optimal,lower_example,abs_gap,"
        "rel_gap\n";
  for (const auto& r : rows)
    os << r.n_steps << "," << fmt(r.lambda) << "," << fmt(r.eps_pep) << ","
       << fmt(r.classic) << "," << fmt(r.optimal) << ","
       << fmt(r.lower_example) << "," << fmt(r.abs_gap) << ","
       << fmt(r.rel_gap) << "\n";
}

struct CommonOpts {
  std::string n_text = "1";
  double lambda = 1.5;
  std::string format = "csv";
  std::string out_path;
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  double rho = 1.0;
  unsigned seed = 20240;
};

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--tol", o.tol, "solver residual tolerance");
  cmd->add_option("--max-iter", o.max_iter, "solver iteration cap");
  cmd->add_option("--rho", o.rho, "initial penalty parameter");
}

int cmd_pep(const CommonOpts& o) {
  const NRange range = parse_n_range(o.n_text);
  std::vector<rppa::RateReport> rows;
  for (std::size_t n = range.lo; n <= range.hi; ++n) {
    const auto inst = rppa::assemble(n, o.lambda);
    rppa::SdpConfig cfg;
    cfg.tol = o.tol;
    cfg.max_iter = o.max_iter;
    cfg.rho = o.rho;
    try {
      const auto sol = rppa::solve_pep(inst, cfg);
      rows.push_back(rppa::RateReport::make(n, o.lambda, sol.eps));
    } catch (const rppa::SolverFailed& e) {
      std::cerr << "solver failed at N=" << n << ": " << e.what() << "\n";
      return kExitSolverFail;
    }
  }
  std::ofstream file;
  std::ostream& os = open_out(file, o.out_path);
  emit_reports(os, rows, o.format);

  bool sandwich_ok = true;
  double max_gap = 0.0;
  for (const auto& r : rows) {
    max_gap = std::max(max_gap, r.abs_gap);
    if (r.eps_pep < r.optimal - 1e-4 || r.eps_pep > r.classic + 1e-4)
      sandwich_ok = false;
  }
  std::cerr << "max |eps_pep - bound_optimal| = " << fmt(max_gap)
            << (sandwich_ok ? " (sandwich holds)" : " (SANDWICH VIOLATED)")
            << "\n";
  return sandwich_ok ? kExitOk : kExitVerifyFail;
}

struct RunOpts {
  std::string op = "piecewise";
  double c = 1.0;
  double delta = 1.0;
  std::vector<double> w0 = {10.0};
  std::size_t n = 5;
  double lambda = 1.5;
  unsigned seed = 20240;
};

int cmd_run(const RunOpts& o) {
  rppa::Operator f;
  rppa::SymMatrix h = rppa::SymMatrix::identity(o.w0.size());
  if (o.op == "piecewise") {
    if (o.w0.size() != 1)
      throw CLI::ValidationError("--w0", "piecewise operator is 1-D");
    f.v = rppa::Piecewise1D{o.c, o.delta};
  } else if (o.op == "affine-identity") {
    const std::size_t d = o.w0.size();
    std::vector<double> m(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
    f.v = rppa::AffineOperator(d, std::move(m), rppa::Vector(d, 0.0));
  } else if (o.op == "zero") {
    f.v = rppa::ZeroOperator{o.w0.size()};
  } else {
    throw CLI::ValidationError("--op", "expected piecewise|affine-identity|zero");
  }

  rppa::ViProblem p{std::move(f),
                    rppa::ConstraintSet{rppa::WholeSpace{o.w0.size()}},
                    std::move(h), o.lambda, o.w0};
  const rppa::Trajectory t = rppa::run(p, o.n);

  std::cout << "k,wt_k\n";
  for (std::size_t k = 0; k <= o.n; ++k) {
    std::cout << k << ",";
    for (std::size_t i = 0; i < t.wt[k].size(); ++i)
      std::cout << (i ? " " : "") << fmt(t.wt[k][i]);
    std::cout << "\n";
  }
  std::cout << "ergodic_mean,";
  for (std::size_t i = 0; i < t.ergodic_mean.size(); ++i)
    std::cout << (i ? " " : "") << fmt(t.ergodic_mean[i]);
  std::cout << "\n";

  double worst_classic = -1e300, worst_optimal = -1e300;
  for (const auto& w : rppa::probe_grid(t, p, 50, o.seed)) {
    const double dist = rppa::h_norm_sq(p.h, rppa::sub(w, p.w0));
    const double gap = rppa::ergodic_gap(t, p, w);
    worst_classic =
        std::max(worst_classic, gap - rppa::bound_classic(o.n, o.lambda) * dist);
    worst_optimal =
        std::max(worst_optimal, gap - rppa::bound_optimal(o.n, o.lambda) * dist);
  }
  const bool ok = worst_classic <= 1e-9 && worst_optimal <= 1e-9;
  std::cout << "bound_classic_excess," << fmt(worst_classic) << "\n";
  std::cout << "bound_optimal_excess," << fmt(worst_optimal) << "\n";
  std::cout << "bounds," << (ok ? "pass" : "FAIL") << "\n";
  return ok ? kExitOk : kExitVerifyFail;
}

int cmd_example(std::size_t n, double lambda) {
  const auto cert = rppa::default_certificate(n, lambda);
  const auto scan = rppa::case_scan(cert);
  std::cout << "N," << cert.n_steps << "\nlambda," << fmt(cert.lambda)
            << "\nw0," << fmt(cert.w0) << "\ndelta," << fmt(cert.delta)
            << "\nc," << fmt(cert.c) << "\nw_star," << fmt(cert.w_star)
            << "\nergodic_mean," << fmt(cert.ergodic_mean)
            << "\nachieved_ratio," << fmt(cert.achieved_ratio)
            << "\ncase_upper_max," << fmt(scan.max_upper) << " at "
            << fmt(scan.arg_upper) << "\ncase_middle_max,"
            << fmt(scan.max_middle) << "\ncase_lower_max,"
            << fmt(scan.max_lower) << "\n";
  const bool ok =
      std::abs(scan.max_upper - cert.achieved_ratio) <= 1e-4 &&
      scan.max_middle <= cert.achieved_ratio + 1e-6 && scan.max_lower < 0.0;
  std::cout << "cases," << (ok ? "pass" : "FAIL") << "\n";
  return ok ? kExitOk : kExitVerifyFail;
}

int cmd_verify(unsigned seed) {
  const auto results = rppa::run_verification(seed);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name << " ("
              << r.detail << ")\n";
    all = all && r.pass;
  }
  return all ? kExitOk : kExitVerifyFail;
}

int cmd_export(const CommonOpts& o) {
  const NRange range = parse_n_range(o.n_text);
  if (range.lo != range.hi)
    throw CLI::ValidationError("--n", "export-sdp takes a single N");
  const auto inst = rppa::assemble(range.lo, o.lambda);
  std::ofstream file;
  std::ostream& os = open_out(file, o.out_path);
  rppa::write_sdp_triplets(os, inst);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed proximal point worst-case rate toolkit"};
  app.require_subcommand(1);

  CommonOpts pep_opts;
  auto* pep = app.add_subcommand("pep", "solve the worst-case SDP over N");
  pep->add_option("--n", pep_opts.n_text, "N or range lo..hi");
  pep->add_option("--lambda", pep_opts.lambda, "relaxation in (0,2)");
  pep->add_option("--format", pep_opts.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  pep->add_option("--out", pep_opts.out_path, "output file (default stdout)");
  add_solver_flags(pep, pep_opts);

  RunOpts run_opts;
  auto* runc = app.add_subcommand("run", "run RPPA and check both bounds");
  runc->add_option("--op", run_opts.op, "piecewise|affine-identity|zero");
  runc->add_option("--c", run_opts.c, "piecewise plateau value");
  runc->add_option("--delta", run_opts.delta, "piecewise kink location");
  runc->add_option("--w0", run_opts.w0, "start point components");
  runc->add_option("--n", run_opts.n, "iteration count N");
  runc->add_option("--lambda", run_opts.lambda, "relaxation in (0,2)");
  runc->add_option("--seed", run_opts.seed, "probe sampling seed");

  std::size_t ex_n = 5;
  double ex_lambda = 1.5;
  auto* ex = app.add_subcommand("example", "lower-bound certificate + case scan");
  ex->add_option("--n", ex_n, "iteration count N");
  ex->add_option("--lambda", ex_lambda, "relaxation in (0,2)");

  unsigned verify_seed = 12345;
  auto* ver = app.add_subcommand("verify", "run the full property suite");
  ver->add_option("--seed", verify_seed, "randomization seed");

  CommonOpts exp_opts;
  auto* exp = app.add_subcommand("export-sdp", "write the SDP triplet file");
  exp->add_option("--n", exp_opts.n_text, "iteration count N");
  exp->add_option("--lambda", exp_opts.lambda, "relaxation in (0,2)");
  exp->add_option("--out", exp_opts.out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadArgs;
  }

  try {
    if (pep->parsed()) return cmd_pep(pep_opts);
    if (runc->parsed()) return cmd_run(run_opts);
    if (ex->parsed()) return cmd_example(ex_n, ex_lambda);
    if (ver->parsed()) return cmd_verify(verify_seed);
    if (exp->parsed()) return cmd_export(exp_opts);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  } catch (const rppa::SolverFailed& e) {
    std::cerr << e.what() << "\n";
    return kExitSolverFail;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitVerifyFail;
  }
  return kExitBadArgs;
}
