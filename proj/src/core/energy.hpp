#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/exponents.hpp"
#include "core/nodal.hpp"

namespace pucci {

/// Weight exponent 2 (p+1)/(p-1) - N; zero exactly at the Sobolev-critical p.
double weight_gamma(double p, int dim);

/// Surface measure of the unit sphere in R^N, from the Gamma function.
double sphere_surface_measure(int dim);

/// Weighted energy of one constant-sign region: the radial weight plateaus at
/// rho^gamma inside the region's concavity-change radius rho and grows like
/// r^gamma outside it.
struct RegionEnergy {
    double a = 0.0;
    double b = 0.0;
    double inflection = 0.0;
    double gamma = 0.0;
    double value = 0.0;
    double quad_error = 0.0;  ///< quadrature error estimate
};

RegionEnergy region_energy(const RadialProfile& profile, double a, double b, double p, int dim,
                           double quad_tol = 1e-8);

struct EnergyReport {
    std::vector<RegionEnergy> per_region;
    double total = 0.0;
    double error_estimate = 0.0;
    std::string to_json() const;
};

EnergyReport total_energy(const RadialProfile& profile, const NodalDecomposition& decomposition,
                          double p, int dim, double quad_tol = 1e-8);

/// Energy constant of a fast-decaying solution on an unbounded domain:
/// weighted integral out to a truncation radius inside the clean fast-decay
/// window plus the closed-form tail of the fitted envelope.
struct SigmaEstimate {
    double value = 0.0;
    double main_part = 0.0;
    double tail_estimate = 0.0;
    double r_trunc = 0.0;
    double c_tail = 0.0;        ///< fitted constant of u ~ c r^{-(Nt-2)}
    double inflection = 0.0;    ///< plateau radius of the weight
    double tail_exponent = 0.0; ///< (Nt-2)(p+1) - gamma - N, positive when finite
    double quad_error = 0.0;
    std::string to_json() const;
};

/// Entire-space constant: center shoot at the ball-threshold estimate.
SigmaEstimate entire_space_energy(const OperatorSpec& spec, double p_star, double tol = 1e-10,
                                  double quad_tol = 1e-8, double r_max = 1e6,
                                  double r_trunc_override = 0.0);

/// Exterior constant: Minus-IVP trajectory at the nodal threshold with the
/// critical slope (pass the truncating bracket endpoint).
SigmaEstimate exterior_energy(const OperatorSpec& spec, double p_star_star, double alpha,
                              double tol = 1e-10, double quad_tol = 1e-8, double r_max = 1e6,
                              double r_trunc_override = 0.0);

/// Lazily-filled bundle of the expensive shared estimates for one
/// (lambda, Lambda, N).
struct CriticalContext {
    std::optional<CriticalExponentEstimate> p_star_minus;
    std::optional<CriticalExponentEstimate> p_star_plus;
    std::optional<CriticalExponentEstimate> p_star_star_plus;
    std::optional<CriticalSlope> slope_at_nodal_threshold;  ///< Minus-IVP at p**
    std::optional<SigmaEstimate> sigma_star_minus;
    std::optional<SigmaEstimate> sigma_star_star_plus;
};

const CriticalExponentEstimate& ensure_p_star(CriticalContext& ctx, const OperatorSpec& base,
                                              Branch branch, const ExponentOptions& opts = {});
const CriticalExponentEstimate& ensure_p_star_star(CriticalContext& ctx,
                                                   const OperatorSpec& base,
                                                   const ExponentOptions& opts = {});
const CriticalSlope& ensure_nodal_slope(CriticalContext& ctx, const OperatorSpec& base,
                                        const ExponentOptions& opts = {});
const SigmaEstimate& ensure_sigma_star_minus(CriticalContext& ctx, const OperatorSpec& base,
                                             const ExponentOptions& opts = {});
const SigmaEstimate& ensure_sigma_star_star(CriticalContext& ctx, const OperatorSpec& base,
                                            const ExponentOptions& opts = {});

struct EnergyLimitRecord {
    double epsilon = 0.0;
    double p = 0.0;
    bool ok = false;
    std::string error;
    double total = 0.0;
    double predicted = 0.0;
    double gap = 0.0;
    double gap_rel = 0.0;
};

struct EnergyLimitTable {
    std::vector<EnergyLimitRecord> rows;
    double predicted_limit = 0.0;
    double sigma = 0.0;        ///< the Sigma constant entering the prediction
    double ball_energy = 0.0;  ///< energy of the limit ball solution entering it
    Table table() const;
};

/// Total-energy sweep against the predicted limit: for the Minus branch the
/// prediction is Sigma*_- plus the total energy of the (k-1)-region limit
/// solution; for the Plus branch it combines the ball energy at the nodal
/// threshold with Sigma**_+ according to the parity of k.
EnergyLimitTable energy_limit_experiment(const OperatorSpec& spec, int k,
                                         const std::vector<double>& epsilons,
                                         CriticalContext& ctx, const ExponentOptions& opts = {},
                                         double quad_tol = 1e-8, int jobs = 0);

}  // namespace pucci
