#pragma once

#include "core/profile.hpp"

namespace pucci {

/// When to end an integration: after the given count of u-zeros (0 = never)
/// or at r_max, whichever comes first.
struct StopRule {
    int uzero_count = 0;
    double r_max = 1e6;
};

/// Exterior initial value problems at the unit sphere: u(1) = 0, u'(1) = alpha.
/// MinusIVP integrates the Minus-branch radial equation, PlusIVP the Plus one.
enum class ExteriorKind { MinusIVP, PlusIVP };

Branch branch_of(ExteriorKind k);

/// The exterior problem whose trajectory continues a nodal solution of the
/// given branch past its first zero (the sign flip swaps the branch).
ExteriorKind exterior_kind_for_gluing(Branch nodal_branch);

/// Shoot from the center: u(0) = u0 > 0, u'(0) = 0, started at a small radius
/// via the second-order series and integrated until the stop rule fires.
/// All zeros of u, u' and u'' along the way are recorded as events.
RadialProfile integrate_from_center(const OperatorSpec& spec, double p, double u0, double r_max,
                                    double tol, StopRule stop);

/// Exterior shoot from u(1) = 0, u'(1) = alpha > 0, stopped at the first
/// zero of u past r = 1 (truncated = false) or at r_max (truncated = true).
RadialProfile integrate_exterior(ExteriorKind kind, const OperatorSpec& spec, double p,
                                 double alpha, double r_max, double tol);

/// Worst relative increase of the monotone diagnostic
///     H = u'^2/2 + |u|^{p+1} / (c (p+1)),
/// with c the regime weight on u'', across consecutive grid points where the
/// magnitude of u is declining and the regime does not switch.  Clean
/// trajectories give a value at roundoff scale; the integrator itself checks
/// this against 100*tol after every run.
double h_diagnostic_worst_increase(const RadialProfile& profile);

const char* to_string(ExteriorKind k);

}  // namespace pucci
