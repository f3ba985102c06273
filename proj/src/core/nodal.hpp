#pragma once

#include <string>
#include <vector>

#include "core/shooting.hpp"
#include "core/table.hpp"

namespace pucci {

/// Per-region summary of a sign-changing radial solution on the unit ball:
/// nodal radii r_i, extremum radii s_i with magnitudes M_i, and the
/// concavity-change radius of each region.
struct NodalDecomposition {
    int k = 0;
    std::vector<double> nodal_radii;       ///< r_1 < ... < r_{k-1} in (0,1)
    std::vector<double> extremum_radii;    ///< s_0 = 0 < s_1 < ... < s_{k-1}
    std::vector<double> extremum_values;   ///< M_0 ... M_{k-1}, all positive
    std::vector<double> inflection_radii;  ///< one per region (NaN when absent)

    void check_interlacing() const;  // throws Internal on violation
    std::string to_json() const;
};

struct NodalSolution {
    RadialProfile profile;  ///< rescaled onto [0,1]
    NodalDecomposition decomposition;
    double boundary_slope = 0.0;
    double shoot_zero_radius = 0.0;  ///< k-th zero of the unscaled center shoot
};

/// Build a k-region solution by continuing the center shoot through k zeros
/// and rescaling the k-th zero onto the unit sphere.  Throws a Numerical
/// error naming the reached count when fewer than k zeros occur below r_max
/// (the expected nonexistence signal for the Plus branch past its nodal
/// threshold).
NodalSolution build_nodal(const OperatorSpec& spec, double p, int k, double tol = 1e-10,
                          double r_max = 1e6);

/// Residuals of the exact rescaling identities tying a two-region solution to
/// the positive ball solution of the same operator.
struct ScalingIdentityReport {
    double residual_node = 0.0;   ///< relative residual of r_1 = (||v|| / M_0)^{(p-1)/2}
    double residual_slope = 0.0;  ///< relative residual of r_1^{(p+1)/(p-1)} u'(r_1) = v'(1)
    double m0 = 0.0;
    double ball_sup = 0.0;  ///< ||v||_inf; strictly below M_0
};

ScalingIdentityReport scaling_identity_check(const NodalSolution& sol, const OperatorSpec& spec,
                                             double p, double tol = 1e-10);

struct SweepRecord {
    double epsilon = 0.0;
    double p = 0.0;
    bool ok = false;
    std::string error;
    NodalDecomposition decomposition;
    double boundary_slope = 0.0;
    double r1_m0 = 0.0;    ///< r_1 M_0^{(p-1)/2}
    double r1_hat = 0.0;   ///< r_1 M_1^{(p-1)/2}
    double s1_hat = 0.0;   ///< s_1 M_1^{(p-1)/2}
    double t1_hat = 0.0;   ///< t_1 M_1^{(p-1)/2}
    std::vector<double> ratios;  ///< M_i / M_{i+1}
};

/// One nodal build per epsilon at p = p_crit - epsilon; per-entry failures
/// are recorded in the row, not fatal.
std::vector<SweepRecord> concentration_sweep(const OperatorSpec& spec, int k,
                                             const std::vector<double>& epsilons, double p_crit,
                                             double tol = 1e-10, double r_max = 1e6,
                                             int jobs = 0);

Table concentration_table(const std::vector<SweepRecord>& records, int k);

struct PositiveSweepRecord {
    double epsilon = 0.0;
    double p = 0.0;
    bool ok = false;
    std::string error;
    double sup = 0.0;
    double r0 = 0.0;              ///< concavity-change radius of the ball solution
    double boundary_slope = 0.0;
    double r0_scaled_sup = 0.0;   ///< r0^{2/(p-1)} ||v||
    double u_r0_over_sup = 0.0;   ///< v(r0) / ||v||
    double r0_scaled_u_r0 = 0.0;  ///< r0^{2/(p-1)} v(r0)
    double slope_normalized = 0.0;  ///< ||v||^{(p(Nt-2)-Nt)/2} v'(1)
};

std::vector<PositiveSweepRecord> positive_solution_sweep(const OperatorSpec& spec,
                                                         const std::vector<double>& epsilons,
                                                         double p_crit, double tol = 1e-10,
                                                         double r_max = 1e6, int jobs = 0);

Table positive_sweep_table(const std::vector<PositiveSweepRecord>& records);

/// Pointwise envelope check on the convex tail of an exterior trajectory:
/// u(r) <= C / (r^2 - t^2 + K)^{(Nt-2)/2} past the concavity change at t,
/// with C, K anchored just past t.  Fast tails satisfy it on the whole
/// computed range; slow tails must fail it far out.
struct DecayBoundReport {
    bool holds = false;
    double worst_margin = 0.0;  ///< min over the tail of the relative slack
    double c_fit = 0.0;
    double k_fit = 0.0;
    double inflection = 0.0;
};

DecayBoundReport decay_bound_check(const RadialProfile& exterior_profile);

}  // namespace pucci
