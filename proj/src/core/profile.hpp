#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "core/spec.hpp"

namespace pucci {

enum class EventKind { UZero, DuZero, DduZero, Undetermined };

/// A located root of u, u' or u'' along a trajectory.
struct Event {
    EventKind kind;
    double radius;
    int sign_before;  ///< sign of the watched quantity just before the root
    int sign_after;   ///< sign just after
};

/// Dense radial trajectory (r, u, u') with located events.  Grid points are
/// the accepted integrator steps; between them the trajectory is recovered
/// by cubic Hermite interpolation, which is what every consumer (event
/// relocation, quadrature, pointwise comparisons) evaluates.
struct RadialProfile {
    OperatorSpec spec;
    double p = 2.0;
    double tol = 1e-10;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
    std::vector<Event> events;
    bool truncated = false;  ///< stopped at r_max rather than at a requested event

    /// Accumulated local error estimates, kept separately for the state scale
    /// and as a dimensionless sum; used to form a-posteriori error estimates
    /// for event radii and derived quantities.
    double err_abs_u = 0.0;
    double err_rel = 0.0;

    std::size_t size() const { return r.size(); }
    double r_front() const { return r.front(); }
    double r_back() const { return r.back(); }

    double value_at(double radius) const;
    double derivative_at(double radius) const;
    void eval_at(double radius, double& u_out, double& du_out) const;

    std::vector<Event> events_of(EventKind kind) const;
    std::optional<double> first_event_radius(EventKind kind) const;
    std::optional<double> last_event_radius(EventKind kind) const;

    /// The trajectory u_a(x) = a^{2/(p-1)} u(a x): grid maps r -> r/a, values
    /// and events transformed accordingly.  Solves the same equation.
    RadialProfile rescaled(double a) const;

    /// Copy restricted to grid points with r <= r_cut (marked truncated).
    RadialProfile truncated_to(double r_cut) const;

    /// Error estimate for the radius of a located u-zero with slope du_zero.
    double event_radius_error_estimate(double du_zero) const;

    void write_csv(const std::string& path) const;
    void write_sidecar_json(const std::string& path) const;
    std::string sidecar_json() const;

private:
    std::size_t cell_index(double radius) const;
};

/// Re-scan a profile for all sign changes of u, u' and of the resolver-
/// recomputed u'', refined on the interpolant; sorted by radius.  Tangential
/// near-zeros of u are flagged as Undetermined rather than dropped.
std::vector<Event> locate_events(const RadialProfile& profile);

const char* to_string(EventKind k);

}  // namespace pucci
