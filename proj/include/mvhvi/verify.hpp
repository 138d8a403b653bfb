#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvhvi/solver.hpp"
#include "mvhvi/types.hpp"

// Executable forms of the equivalence, solution-set, uniqueness, and
// stability statements.  Residuals probe the four formulations at sampled
// test points; clamped at zero, so a certified pair scores ~0 everywhere.

namespace mvhvi {

enum class Formulation { Original, Minty, Combined, MintyCombined };

const char* to_string(Formulation f);

struct FormulationResidual {
  Formulation formulation = Formulation::Original;
  double violation = 0.0;
  Vec worst_v;
  Vec worst_rho;
};

/// Worst clamped violation of one formulation over the probe set (random
/// ball samples, coordinate rays, reflections, projected multiplier
/// perturbations), optionally sharpened by local pattern search.
FormulationResidual residual(const ProblemInstance& inst, const Vec& u,
                             const Vec& lambda, Formulation f,
                             const ProbeConfig& probes);

ResidualReport full_report(const ProblemInstance& inst, const Vec& u,
                           const Vec& lambda, const ProbeConfig& probes);

/// True when the four formulations agree (all within tol or all outside);
/// disagreement flags a probe artifact or a hypothesis violation.
bool equivalence_check(const ProblemInstance& inst, const Vec& u,
                       const Vec& lambda, double tol,
                       ResidualReport* out = nullptr);

/// Max Combined violation along the segment between two certified pairs.
double convexity_probe(const ProblemInstance& inst, const SolutionPair& s1,
                       const SolutionPair& s2,
                       const std::vector<double>& t_grid,
                       const ProbeConfig& probes);

struct SolutionSetProbe {
  std::vector<SolutionPair> solutions;
  double sup_u = 0.0;
  double sup_lambda = 0.0;
  double diameter_u = 0.0;
  double diameter_lambda = 0.0;
  bool chain_bound_ok = true;      // <Au,u> <= alpha_J + beta_J ||g||^th ||u||^th + ||f|| ||u||
  bool multiplier_bound_ok = true; // alpha_b ||l|| <= ||Au|| + ||g^T dJ box|| + ||f||
};

/// Solves for random loads in a ball and checks the a-priori bound chain on
/// every certified solution.
SolutionSetProbe boundedness_probe(const ProblemInstance& inst,
                                   double f_ball_radius, int samples,
                                   const SolverConfig& cfg,
                                   std::uint64_t seed);

/// A-priori multiplier bound slack: rhs - alpha_b ||lambda|| (>= 0 expected).
double multiplier_bound_gap(const ProblemInstance& inst, const Vec& u,
                            const Vec& lambda);
/// Coercivity chain slack at u (>= 0 expected).
double coercivity_chain_gap(const ProblemInstance& inst, const Vec& u);

/// (lhs, rhs) of the Hoelder stability bound
///   ||u(f1) - u(f2)|| <= (||f1 - f2|| / c_h)^(1/(tau-1)),
/// the form the strong-monotonicity chain c_h ||du||^tau <= ||df|| ||du||
/// delivers.  Requires the power form of h.
std::pair<double, double> stability_check(const ProblemInstance& inst,
                                          const Vec& f1, const Vec& f2,
                                          const SolverConfig& cfg);

struct UscReport {
  std::vector<double> residuals; // Combined residual of (u_n, l_n) against f
  bool decayed = false;
};

/// Solves along f_n = f + scale * 2^-n e_1 and checks the solution-map
/// closedness surrogate: residuals against the limit load must decay.
UscReport usc_probe(const ProblemInstance& inst, const Vec& f,
                    double perturbation_scale, int steps,
                    const SolverConfig& cfg);

struct CrosscheckReport {
  bool applicable = false;
  std::string mode; // "lcp" or "pure-hvi"
  double u_gap = 0.0;      // distance between routes
  double residual = 0.0;   // certification of the reference solution
  Vec reference_u;
  Vec reference_lambda;
};

/// For J == 0 with symmetric positive definite P and orthant Lambda, solves
/// the equivalent complementarity system by active-set enumeration (m <= 8)
/// and compares with the main solver.  For B == 0 checks multiplier
/// independence of the state and certifies the reduced inequality.
CrosscheckReport special_case_crosscheck(const ProblemInstance& inst,
                                         const SolverConfig& cfg);

/// Active-set enumeration solution of  P u + B^T lambda = f,  B u <= 0,
/// lambda >= 0, lambda^T B u = 0 (independent reference route).
std::pair<Vec, Vec> lcp_active_set_solve(const ProblemInstance& inst);

/// Grid landscape of the Combined violation for 1-D/2-D states, written as
/// gnuplot-compatible blocks.
void write_violation_landscape(const ProblemInstance& inst, const Vec& lambda,
                               double r, int steps, const std::string& path);

} // namespace mvhvi
