// Command-line front end: instance ingestion, subcommand dispatch, CSV and
// plot-file reporting.
//
// Exit codes: 0 success/verified, 1 usage or I/O error, 2 hypothesis
// violation, 3 solver failure, 4 verification anomaly.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "mvhvi/gallery.hpp"
#include "mvhvi/hypotheses.hpp"
#include "mvhvi/instance_io.hpp"
#include "mvhvi/oracle.hpp"
#include "mvhvi/report_io.hpp"
#include "mvhvi/solver.hpp"
#include "mvhvi/suite.hpp"
#include "mvhvi/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerification = 4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MVHVI_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw mvhvi::ParseError("MVHVI_SEED must be an unsigned integer");
    }
  }
  return 0x6d76687669ULL;
}

mvhvi::ProblemInstance resolve_instance(const std::string& ref) {
  if (mvhvi::is_gallery_name(ref)) return mvhvi::make_gallery_instance(ref);
  return mvhvi::load_instance(ref);
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

int run(int argc, char** argv) {
  CLI::App app{"mixed variational-hemivariational inequality toolkit"};
  app.require_subcommand(1);

  std::string instance_ref, out_dir = ".", format = "human";
  std::uint64_t seed = default_seed();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve an instance");
  std::string trace_path;
  double tol = 1e-10;
  long max_outer = 100000;
  int restarts = 0;
  bool force = false;
  solve_cmd->add_option("--instance", instance_ref, "instance file or gallery name")
      ->required();
  solve_cmd->add_option("--tol", tol, "outer/inner tolerance");
  solve_cmd->add_option("--max-outer", max_outer, "outer iteration cap");
  solve_cmd->add_option("--restarts", restarts,
                        "run a multi-start uniqueness report with this many "
                        "restarts");
  solve_cmd->add_option("--trace", trace_path, "iteration trace CSV path");
  solve_cmd->add_option("--out", out_dir, "output directory");
  solve_cmd->add_option("--seed", seed, "seed for stochastic probes");
  solve_cmd->add_option("--format", format, "csv | human");
  solve_cmd->add_flag("--force", force, "run even if hypothesis audits fail");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "check a candidate pair");
  std::string u_csv, lambda_csv, formulation = "all", landscape_path;
  long probes = 10000;
  bool no_refine = false;
  verify_cmd->add_option("--instance", instance_ref, "instance file or gallery name")
      ->required();
  verify_cmd->add_option("--u", u_csv, "state, comma-separated")->required();
  verify_cmd->add_option("--lambda", lambda_csv, "multiplier, comma-separated")
      ->required();
  verify_cmd->add_option("--formulation", formulation,
                         "all | original | minty | combined | minty-combined");
  verify_cmd->add_option("--probes", probes, "probe count");
  verify_cmd->add_option("--seed", seed, "probe seed");
  verify_cmd->add_option("--tol", tol, "certification tolerance");
  verify_cmd->add_flag("--no-refine", no_refine, "skip local refinement");
  verify_cmd->add_option("--out", out_dir, "output directory");
  verify_cmd->add_option("--landscape", landscape_path,
                         "write a violation landscape data file (1-D/2-D)");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "run the hypothesis audits");
  long audit_samples = 4000;
  audit_cmd->add_option("--instance", instance_ref, "instance file or gallery name")
      ->required();
  audit_cmd->add_option("--samples", audit_samples, "samples per audit");
  audit_cmd->add_option("--seed", seed, "audit seed");
  audit_cmd->add_option("--out", out_dir, "output directory");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force grid sweep");
  double o_r = 5.0, o_s = 5.0, o_delta = 0.01, o_tol = 0.0;
  oracle_cmd->add_option("--instance", instance_ref, "instance file or gallery name")
      ->required();
  oracle_cmd->add_option("--r", o_r, "state ball radius");
  oracle_cmd->add_option("--s", o_s, "multiplier ball radius");
  oracle_cmd->add_option("--delta", o_delta, "grid step");
  oracle_cmd->add_option("--tol", o_tol,
                         "acceptance tolerance (0 = modulus default)");
  oracle_cmd->add_option("--out", out_dir, "output directory");

  // stability
  auto* stab_cmd = app.add_subcommand("stability", "Hoelder stability sweep");
  int stab_pairs = 100;
  double stab_scale = 1.0;
  stab_cmd->add_option("--instance", instance_ref, "instance file or gallery name")
      ->required();
  stab_cmd->add_option("--pairs", stab_pairs, "number of load pairs");
  stab_cmd->add_option("--scale", stab_scale, "load perturbation scale");
  stab_cmd->add_option("--seed", seed, "sampling seed");

  // suite
  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance battery");
  suite_cmd->add_option("--seed", seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  if (solve_cmd->parsed()) {
    const mvhvi::ProblemInstance inst = resolve_instance(instance_ref);
    mvhvi::SolverConfig cfg;
    cfg.tol_u = tol;
    cfg.tol_outer = tol;
    cfg.max_outer = max_outer;
    cfg.seed = seed;
    cfg.skip_audits = force;
    cfg.certify.seed = seed;
    auto [pair, trace] = mvhvi::solve(inst, cfg);
    const std::string tpath =
        trace_path.empty() ? out_path(out_dir, "trace.csv") : trace_path;
    mvhvi::write_trace_csv(trace, tpath);
    mvhvi::write_report_csv(pair.residuals, pair.u, pair.lambda,
                            out_path(out_dir, "report.csv"));
    if (restarts > 0) {
      mvhvi::SolverConfig mcfg = cfg;
      mcfg.restarts = restarts;
      const mvhvi::UniquenessReport rep =
          mvhvi::multi_start(inst, mcfg, seed);
      std::cout << "multi-start: applicable=" << rep.applicable
                << " u-spread=" << mvhvi::format_double(rep.u_spread)
                << " lambda-spread="
                << mvhvi::format_double(rep.lambda_spread) << "\n";
    }
    if (format == "csv") {
      std::cout << "u,\"" << mvhvi::vec_to_csv(pair.u) << "\"\n";
      std::cout << "lambda,\"" << mvhvi::vec_to_csv(pair.lambda) << "\"\n";
      std::cout << "residual," << mvhvi::format_double(pair.residuals.max())
                << "\n";
    } else {
      std::cout << "solved in " << trace.rows.size() << " outer iterations ("
                << trace.inner_iterations << " inner): u=["
                << mvhvi::vec_to_csv(pair.u) << "] lambda=["
                << mvhvi::vec_to_csv(pair.lambda) << "] worst residual "
                << mvhvi::format_double(pair.residuals.max()) << "\n";
    }
    return pair.residuals.max() <= 10.0 * tol ? kExitOk : kExitVerification;
  }

  if (verify_cmd->parsed()) {
    const mvhvi::ProblemInstance inst = resolve_instance(instance_ref);
    const mvhvi::Vec u = mvhvi::vec_from_csv(u_csv);
    const mvhvi::Vec lambda = mvhvi::vec_from_csv(lambda_csv);
    if (tol == 1e-10) tol = 1e-8; // certification default
    mvhvi::ProbeConfig pc;
    pc.count = probes;
    pc.seed = seed;
    pc.refine = !no_refine;
    mvhvi::ResidualReport rep;
    rep.sampling = pc;
    bool consistent = true;
    if (formulation == "all") {
      rep = mvhvi::full_report(inst, u, lambda, pc);
      const bool all_in = rep.max() <= tol;
      const bool all_out = rep.r_original > tol && rep.r_minty > tol &&
                           rep.r_combined > tol && rep.r_minty_combined > tol;
      consistent = all_in || all_out;
    } else {
      mvhvi::Formulation f;
      if (formulation == "original") f = mvhvi::Formulation::Original;
      else if (formulation == "minty") f = mvhvi::Formulation::Minty;
      else if (formulation == "combined") f = mvhvi::Formulation::Combined;
      else if (formulation == "minty-combined")
        f = mvhvi::Formulation::MintyCombined;
      else throw mvhvi::ParseError("unknown formulation: " + formulation);
      const mvhvi::FormulationResidual r =
          mvhvi::residual(inst, u, lambda, f, pc);
      rep.r_original = rep.r_minty = rep.r_combined = rep.r_minty_combined =
          r.violation;
    }
    mvhvi::write_report_csv(rep, u, lambda, out_path(out_dir, "report.csv"));
    if (!landscape_path.empty()) {
      mvhvi::write_violation_landscape(inst, lambda,
                                       2.0 * (u.norm() + 1.0), 201,
                                       landscape_path);
    }
    std::cout << "residuals: original="
              << mvhvi::format_double(rep.r_original)
              << " minty=" << mvhvi::format_double(rep.r_minty)
              << " combined=" << mvhvi::format_double(rep.r_combined)
              << " minty-combined="
              << mvhvi::format_double(rep.r_minty_combined) << "\n";
    if (!consistent) {
      std::cout << "formulations disagree at tol "
                << mvhvi::format_double(tol) << "\n";
      return kExitVerification;
    }
    return rep.max() <= tol ? kExitOk : kExitVerification;
  }

  if (audit_cmd->parsed()) {
    const mvhvi::ProblemInstance inst = resolve_instance(instance_ref);
    const mvhvi::AuditReport rep =
        mvhvi::audit_instance(inst, audit_samples, seed);
    for (const auto& e : rep.entries) {
      std::cout << e.name << ": " << mvhvi::to_string(e.status)
                << " margin=" << mvhvi::format_double(e.margin)
                << " seed=" << e.seed;
      if (e.witness) std::cout << " witness=" << *e.witness;
      std::cout << "\n";
    }
    mvhvi::write_audit_csv(rep, out_path(out_dir, "audit.csv"));
    return rep.all_pass() ? kExitOk : kExitHypothesis;
  }

  if (oracle_cmd->parsed()) {
    const mvhvi::ProblemInstance inst = resolve_instance(instance_ref);
    if (o_tol <= 0.0) {
      o_tol = mvhvi::oracle_default_tol(inst, o_r, o_s, o_delta);
    }
    const mvhvi::OracleResult res =
        mvhvi::brute_force_oracle(inst, o_r, o_s, o_delta, o_tol);
    const std::string path = out_path(out_dir, "oracle_hits.csv");
    std::ofstream out(path, std::ios::binary);
    out << "violation,u,lambda\n";
    for (const auto& h : res.hits) {
      out << mvhvi::format_double(h.violation) << ",\""
          << mvhvi::vec_to_csv(h.u) << "\",\"" << mvhvi::vec_to_csv(h.lambda)
          << "\"\n";
    }
    std::cout << res.hits.size() << " grid points within tol "
              << mvhvi::format_double(res.tol) << " of "
              << res.candidates << " candidates"
              << (res.truncated ? " (truncated)" : "")
              << (res.boundary_touching ? " (boundary-touching)" : "")
              << "\n";
    if (res.hits.empty() || res.boundary_touching) return kExitVerification;
    return kExitOk;
  }

  if (stab_cmd->parsed()) {
    const mvhvi::ProblemInstance inst = resolve_instance(instance_ref);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, stab_scale);
    mvhvi::SolverConfig cfg;
    cfg.skip_audits = true;
    cfg.certify.count = 1000;
    double worst = 0.0;
    for (int p = 0; p < stab_pairs; ++p) {
      mvhvi::Vec f1 = inst.f, f2 = inst.f;
      for (int i = 0; i < f1.size(); ++i) {
        f1[i] += g(rng);
        f2[i] += g(rng);
      }
      if ((f1 - f2).norm() < 1e-6) continue;
      const auto [lhs, rhs] = mvhvi::stability_check(inst, f1, f2, cfg);
      worst = std::max(worst, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-8)) {
        std::cout << "stability bound violated: lhs="
                  << mvhvi::format_double(lhs)
                  << " rhs=" << mvhvi::format_double(rhs) << "\n";
        return kExitVerification;
      }
    }
    std::cout << stab_pairs << " pairs, worst lhs/rhs "
              << mvhvi::format_double(worst) << "\n";
    return kExitOk;
  }

  if (suite_cmd->parsed()) {
    const auto results = mvhvi::run_acceptance_suite(seed, std::cout);
    return mvhvi::all_passed(results) ? kExitOk : kExitVerification;
  }

  return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mvhvi::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mvhvi::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mvhvi::InnerDivergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const mvhvi::ScheduleExhausted& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const mvhvi::Error& e) {
    // Hypothesis gates, constant gaps, growth misfits, dimension limits.
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
