#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/integrate.hpp"

namespace pucci {

/// The positive Dirichlet solution on the unit ball, obtained by shooting
/// from u(0) = 1 to the first zero and rescaling it onto [0,1].
struct BallSolution {
    RadialProfile profile;  ///< rescaled solution on [0,1]
    double boundary_slope;  ///< v'(1) < 0
    double first_zero;      ///< zero radius of the unscaled shoot
    double sup() const { return profile.u.front(); }
};

BallSolution positive_ball_solution(const OperatorSpec& spec, double p, double tol = 1e-10,
                                    double r_max = 1e6);

enum class DecayLabel { Fast, Slow, PseudoSlowOrUndetermined };

/// Tail classification of a positive truncated trajectory: least-squares
/// slope of log u against log r over the fit window, matched against the
/// fast rate -(Ntilde-2) and the slow rate -2/(p-1).
struct DecayClass {
    DecayLabel label = DecayLabel::PseudoSlowOrUndetermined;
    double fitted_exponent = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

/// Classify the decay of a truncated positive-tail profile.  The effective
/// dimension comes from the profile's own branch.  Requires the tail to span
/// at least two decades past the last concavity change.
DecayClass classify_decay(const RadialProfile& profile);
DecayClass classify_decay(const RadialProfile& profile, double n_tilde, double p);

/// Result of one exterior shoot.
struct ShootingOutcome {
    enum class Kind { CrossedZero, PositiveTruncated };
    Kind kind;
    RadialProfile profile;
    double rho = 0.0;                  ///< first zero past r = 1 (CrossedZero only)
    std::optional<double> tau;         ///< interior maximum radius
    std::optional<double> sigma;       ///< concavity-change radius
    std::optional<DecayClass> decay;   ///< attached when truncated
    double r_max_used = 0.0;

    bool crossed() const { return kind == Kind::CrossedZero; }
    std::string to_json() const;
};

/// Exterior shoot with decay classification attached when truncated.  A
/// truncated run whose tail has not yet settled onto (at most) the slow rate
/// is re-run with a 10x larger horizon before a non-crossing verdict is
/// accepted.
ShootingOutcome rho_alpha(ExteriorKind kind, const OperatorSpec& spec, double p, double alpha,
                          double tol = 1e-10, double r_max = 1e6);

/// Bisection estimate of the critical slope alpha*(p): the infimum slope
/// whose exterior trajectory returns to zero at a finite radius.
struct CriticalSlope {
    double p = 0.0;
    double alpha_star = 0.0;
    double alpha_lo = 0.0;  ///< verified positive-truncated (when alpha_star > 0)
    double alpha_hi = 0.0;  ///< verified crossing
    double r_max_used = 0.0;
    std::string to_json() const;
};

CriticalSlope critical_slope(ExteriorKind kind, const OperatorSpec& spec, double p,
                             double slope_tol = 1e-6, double tol = 1e-10, double r_max = 1e6);

/// Radius range on which the local log-slope r u'/u of a positive decaying
/// tail stays within 8% of the fast rate -(n_tilde - 2).
struct FastWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// Longest contiguous fast-rate window past the first concavity change;
/// throws a Numerical error when there is none.
FastWindow fast_decay_window(const RadialProfile& profile, double n_tilde);

/// One point of the log-radius phase trajectory x(t) = e^{2t/(p-1)} u(e^t).
struct PhasePoint {
    double t, x, dx;
};

std::vector<PhasePoint> emden_fowler_trajectory(const RadialProfile& profile, double p);
void write_phase_csv(const std::vector<PhasePoint>& traj, const std::string& path);

const char* to_string(DecayLabel label);

}  // namespace pucci
