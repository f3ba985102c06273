#pragma once

#include <optional>
#include <string>

#include "core/shooting.hpp"

namespace pucci {

enum class ExponentWhich { PStarMinus, PStarPlus, PStarStarPlus };

/// Record of the verification run at one bracket endpoint.
struct ExponentCertificate {
    double p = 0.0;
    std::string verdict;  // "crossed_zero", "positive_truncated", "gap_positive", ...
    double value = 0.0;   // zero radius, fitted decay exponent or gap value
};

struct CriticalExponentEstimate {
    ExponentWhich which;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    OperatorSpec spec;
    ExponentCertificate low_side;
    ExponentCertificate high_side;
    bool bounds_ok = false;  ///< strict containment in the a-priori open interval
    double bound_lo = 0.0;   ///< the a-priori interval used to seed the bisection
    double bound_hi = 0.0;
    double r_max_used = 0.0;
    std::string to_json() const;
};

struct ExponentOptions {
    double p_tol = 1e-3;
    double tol = 1e-8;        ///< integrator tolerance for the first bisection levels
    double tol_floor = 1e-11; ///< tightened one order per level down to this
    double r_max = 1e6;
    double slope_tol = 1e-7;  ///< slope bisection tolerance inside the gap function
};

/// A-priori open interval for the ball threshold of spec.branch, used as the
/// initial bisection bracket.
std::pair<double, double> ball_exponent_bounds(const OperatorSpec& spec);

/// Threshold exponent for positive solutions on the unit ball, located by
/// bisection on the center-shoot indicator: a shoot from u(0) = 1 crossing
/// zero below r_max means the probe is below the threshold.
CriticalExponentEstimate critical_exponent_ball(const OperatorSpec& spec,
                                                const ExponentOptions& opts = {});

/// Gap g(p) = |v'(1)| - alpha*(p) between the Plus-branch ball boundary slope
/// and the Minus-IVP critical slope; positive exactly when a two-region
/// sign-changing solution can be glued at this exponent.
double nodal_gap(const OperatorSpec& spec_plus, double p, const ExponentOptions& opts = {});

/// The nodal threshold for the Plus branch: sign-change radius of the gap
/// function between the two ball thresholds.
CriticalExponentEstimate critical_exponent_nodal(const OperatorSpec& spec_plus,
                                                 const ExponentOptions& opts = {});

/// All three estimates for one (lambda, Lambda, N).
struct ExponentTriple {
    CriticalExponentEstimate p_star_minus;
    CriticalExponentEstimate p_star_plus;
    CriticalExponentEstimate p_star_star_plus;
};

ExponentTriple estimate_all_exponents(const OperatorSpec& base, const ExponentOptions& opts = {});

const char* to_string(ExponentWhich which);

}  // namespace pucci
