#pragma once

#include <vector>

#include "mvhvi/types.hpp"

// Desk-scale ground truth: a full sweep of the Combined formulation over a
// candidate grid, each candidate tested against every grid test point.
// Limited to n_V + m_E <= 4 and a 1e8 candidate budget.

namespace mvhvi {

struct OracleHit {
  Vec u;
  Vec lambda;
  double violation = 0.0;
};

struct OracleResult {
  std::vector<OracleHit> hits;
  double tol = 0.0;
  double delta = 0.0;
  long candidates = 0;
  bool truncated = false;         // hit list capped
  bool boundary_touching = false; // some hit sits on the candidate ball rim

  /// Smallest distance from u to a hit state (infinity when empty).
  double nearest_u(const Vec& u) const;
};

/// Candidate and test grids share the same lattice over K(r) x (Y(s)); the
/// lattice contains 0 exactly, so kinks at the origin are candidates (a
/// kink solution off the lattice cannot be certified by any tolerance: the
/// violation jumps where the subgradient interval collapses).
OracleResult brute_force_oracle(const ProblemInstance& inst, double r,
                                double s, double delta, double tol);

/// Conservative modulus-of-continuity bound: a step-delta lattice neighbour
/// of a smooth-point solution violates by at most this much.
double oracle_default_tol(const ProblemInstance& inst, double r, double s,
                          double delta);

} // namespace mvhvi
