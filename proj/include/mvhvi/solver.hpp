#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvhvi/types.hpp"

// Uzawa-type outer iteration on the multiplier with an inner relaxed-monotone
// inclusion solve for the state, wrapped in a growing-ball continuation:
//   u    <- inner solve of  f - A(u) - B^T lambda  in  gamma^T dJ(gamma u),
//   lambda <- project_Lambda(lambda + t * B * u),
// iterates kept inside K(r) x Y(s) and the schedule advanced when they touch
// the boundary, so an accepted solution is interior to its ball.

namespace mvhvi {

struct SolverConfig {
  double outer_step = 0.0; // 0 = alpha_b^2 / (2 c_h), or 0.1 when alpha_b = 0
  double inner_step = 0.0; // 0 = 0.5 c_h / L^2 with L the operator bound
  double tol_u = 1e-10;
  double tol_outer = 1e-10;
  long max_outer = 100000;
  long max_inner = 20000;
  /// Ball radii (r_j, s_j); empty = 2^j for j = 0..20.
  std::vector<std::pair<double, double>> radii_schedule;
  int restarts = 20;
  std::uint64_t seed = 0x7532a1ULL;
  bool skip_audits = false;
  long audit_samples = 2000;
  ProbeConfig certify;
  std::optional<Vec> u0;
  std::optional<Vec> lambda0;
  int schedule_start = 0;
};

struct OuterIterate {
  long iter = 0;
  double r = 0.0;
  double s = 0.0;
  double u_update_norm = 0.0;
  double compl_residual = 0.0;
};

struct SolveTrace {
  std::vector<OuterIterate> rows;
  std::string termination;
  int final_schedule_index = 0;
  long inner_iterations = 0;
};

/// Solves the state inclusion at fixed lambda by the damped fixed point
///   u <- u - eta (A(u) + gamma^T xi(u) + B^T lambda - f),
/// xi(u) the box element closest to realizing the inclusion (componentwise
/// median/clamp projection).  eta halves on residual increase.
Vec inner_solve_u(const ProblemInstance& inst, const Vec& lambda,
                  const Vec& u0, const SolverConfig& cfg,
                  double ball_radius = 0.0, long* iterations = nullptr);

std::pair<SolutionPair, SolveTrace> solve(const ProblemInstance& inst,
                                          const SolverConfig& cfg = {});

/// Violation of the multiplier inequality b(u, rho - lambda) <= 0 over the
/// admissible set: feasibility + complementarity gap for the orthant, the
/// closed-form box maximizer for boxes, and an exact enumeration LP over
/// Lambda intersected with the s-ball for polyhedra (m <= 8).
double complementarity_residual(const ProblemInstance& inst, const Vec& u,
                                const Vec& lambda, double s_ball = 0.0);

struct UniquenessReport {
  bool applicable = false; // requires the power form of h
  double u_spread = 0.0;
  double lambda_spread = 0.0;
  bool consistent = false;
  std::vector<SolutionPair> runs;
};

/// Repeated solves from random starting points; the state spread certifies
/// first-component uniqueness, the multiplier spread is reported as-is.
UniquenessReport multi_start(const ProblemInstance& inst,
                             const SolverConfig& cfg, std::uint64_t seed);

/// Step sizes actually used for a given instance and ball radius.
std::pair<double, double> default_steps(const ProblemInstance& inst,
                                        double ball_radius);

} // namespace mvhvi
