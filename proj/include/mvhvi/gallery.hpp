#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvhvi/types.hpp"

namespace mvhvi {

/// Friction kernel j(x) = w |x| - q x^2 / 2 (nonmonotone for q > 0).
struct FrictionParams {
  double w = 1.0;
  double q = 0.5;
};

/// 1-D rod, node 0 clamped, `nodes`-1 free nodes coupled by elements of the
/// given stiffness, nonmonotone friction and a nonpenetration multiplier at
/// the free end, load applied there.  Constants are computed from the
/// assembly: m_A is the smallest stiffness eigenvalue, m_J the friction
/// kernel's quadratic coefficient; their gap must admit a quadratic h.
ProblemInstance build_contact_rod(int nodes, const FrictionParams& friction,
                                  double stiffness, double load);

/// Named built-in instances: "scalar-lcp", "kink-multiplier",
/// "contact-rod-<N>".
ProblemInstance make_gallery_instance(const std::string& name);
std::vector<std::string> gallery_names();
bool is_gallery_name(const std::string& name);

struct GeneratorOptions {
  int max_dim = 6;
  int force_n = 0; // 0 = random
  int force_m = 0;
  int force_k = 0;
  bool zero_J = false;
  bool zero_B = false;
  bool orthant_only = false;
  bool kinks_at_zero_only = false;
  double f_scale = 1.5;
};

/// Random instance passing every hypothesis audit by construction: the
/// symmetric part of P carries the declared m_A, derivative jumps of J are
/// upward, gamma is scaled so m_J ||gamma||^2 < m_A, B keeps full row rank,
/// h is the derived quadratic, and the growth constants are closed-form
/// pointwise bounds.
ProblemInstance random_audited_instance(std::uint64_t seed,
                                        const GeneratorOptions& opts = {});

} // namespace mvhvi
