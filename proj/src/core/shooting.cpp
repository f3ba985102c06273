#include "core/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace pucci {

BallSolution positive_ball_solution(const OperatorSpec& spec, double p, double tol,
                                    double r_max) {
    RadialProfile shoot = integrate_from_center(spec, p, 1.0, r_max, tol, StopRule{1, r_max});
    if (shoot.truncated)
        fail_numeric("positive_ball_solution: no zero found below r_max (exponent at or above "
                     "the critical value for this operator)");
    const double rho = shoot.events_of(EventKind::UZero).front().radius;
    BallSolution out{shoot.rescaled(rho), 0.0, rho};
    out.boundary_slope = out.profile.du.back();
    return out;
}

DecayClass classify_decay(const RadialProfile& prof) {
    return classify_decay(prof, dimension_like(prof.spec), prof.p);
}

DecayClass classify_decay(const RadialProfile& prof, double n_tilde, double p) {
    if (!prof.truncated)
        fail_invalid("classify_decay: profile must be a truncated positive tail");
    const double r_end = prof.r_back();
    double t_last = prof.r_front();
    if (auto t = prof.last_event_radius(EventKind::DduZero)) t_last = *t;
    if (r_end < 100.0 * std::max(t_last, prof.r_front()))
        fail_numeric("classify_decay: tail too short (needs two decades past the last "
                     "concavity change)");

    const double w_hi = r_end;
    const double w_lo = r_end / 10.0;
    double sxx = 0, sx = 0, sy = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i];
        if (r < w_lo || r > w_hi) continue;
        const double au = std::abs(prof.u[i]);
        if (au <= 0.0) continue;
        const double x = std::log(r), y = std::log(au);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 8) fail_numeric("classify_decay: too few tail samples in the fit window");
    const double denom = double(n) * sxx - sx * sx;
    const double slope = (double(n) * sxy - sx * sy) / denom;

    const double fast = -(n_tilde - 2.0);
    const double slow = -2.0 / (p - 1.0);
    const double margin = 0.25 * std::abs(fast - slow);

    DecayClass out;
    out.fitted_exponent = slope;
    out.window_lo = w_lo;
    out.window_hi = w_hi;
    if (std::abs(slope - fast) <= margin)
        out.label = DecayLabel::Fast;
    else if (std::abs(slope - slow) <= margin)
        out.label = DecayLabel::Slow;
    else
        out.label = DecayLabel::PseudoSlowOrUndetermined;
    return out;
}

ShootingOutcome rho_alpha(ExteriorKind kind, const OperatorSpec& spec, double p, double alpha,
                          double tol, double r_max) {
    double horizon = r_max;
    for (int attempt = 0;; ++attempt) {
        RadialProfile prof = integrate_exterior(kind, spec, p, alpha, horizon, tol);
        ShootingOutcome out;
        out.tau = prof.first_event_radius(EventKind::DuZero);
        out.sigma = prof.first_event_radius(EventKind::DduZero);
        out.r_max_used = horizon;

        if (!prof.truncated) {
            out.kind = ShootingOutcome::Kind::CrossedZero;
            out.rho = prof.events_of(EventKind::UZero).front().radius;
            out.profile = std::move(prof);
            return out;
        }

        // Truncated-positive is only accepted as a non-crossing verdict once
        // the tail has settled onto a decay no faster than the slow rate;
        // otherwise the trajectory may still be heading for a zero beyond the
        // horizon and the run is repeated on a 10x window.
        bool settled = false;
        DecayClass dc;
        try {
            dc = classify_decay(prof, dimension_like(prof.spec), p);
            const double slow = -2.0 / (p - 1.0);
            const double margin =
                0.25 * std::abs((dimension_like(prof.spec) - 2.0) - 2.0 / (p - 1.0));
            settled = dc.fitted_exponent >= slow - margin;
        } catch (const Error&) {
            settled = false;
        }
        if (settled || attempt >= 2) {
            out.kind = ShootingOutcome::Kind::PositiveTruncated;
            out.decay = dc;
            out.profile = std::move(prof);
            return out;
        }
        horizon *= 10.0;
    }
}

namespace {

// Walk an exterior probe: true iff the trajectory crosses zero below the horizon.
bool crosses(ExteriorKind kind, const OperatorSpec& spec, double p, double alpha, double tol,
             double& horizon) {
    ShootingOutcome o = rho_alpha(kind, spec, p, alpha, tol, horizon);
    horizon = std::max(horizon, o.r_max_used);
    return o.crossed();
}

}  // namespace

CriticalSlope critical_slope(ExteriorKind kind, const OperatorSpec& spec, double p,
                             double slope_tol, double tol, double r_max) {
    if (!(p > 1.0)) fail_invalid("critical_slope: exponent p must exceed 1");
    if (!(slope_tol > 0.0)) fail_invalid("critical_slope: slope tolerance must be positive");
    constexpr double kAlphaCap = 1e6;
    constexpr double kAlphaFloor = 1e-8;

    // Seed from the boundary slope of the ball solution on the other branch
    // (the slope the gluing construction would use); fall back to 1e-3.
    double seed = 1e-3;
    try {
        seed = std::abs(
            positive_ball_solution(spec.with_branch(branch_of(kind)).flipped(), p, tol, r_max)
                .boundary_slope);
    } catch (const Error&) {
    }
    seed = std::clamp(seed, 1e-6, 1e3);

    double horizon = r_max;

    // find a crossing slope
    double hi = seed;
    while (!crosses(kind, spec, p, hi, tol, horizon)) {
        hi *= 2.0;
        if (hi > kAlphaCap)
            fail_numeric("critical_slope: no crossing slope found below the cap (indicator not "
                         "bracketed)");
    }

    // walk down for a non-crossing slope
    double lo = hi / 2.0;
    while (crosses(kind, spec, p, lo, tol, horizon)) {
        lo /= 2.0;
        if (lo < kAlphaFloor) {
            // every probe crossed: the threshold sits at zero
            CriticalSlope out;
            out.p = p;
            out.alpha_star = 0.0;
            out.alpha_lo = 0.0;
            out.alpha_hi = 2.0 * lo;
            out.r_max_used = horizon;
            return out;
        }
    }
    hi = 2.0 * lo < hi ? 2.0 * lo : hi;

    while (hi - lo > slope_tol) {
        const double mid = 0.5 * (lo + hi);
        if (crosses(kind, spec, p, mid, tol, horizon))
            hi = mid;
        else
            lo = mid;
    }

    // The horizon may have grown during bisection; endpoints certify against
    // the final horizon.  If the enlarged window flipped the lower endpoint
    // to crossing, the whole search is redone on that window.
    if (horizon > r_max && crosses(kind, spec, p, lo, tol, horizon)) {
        if (horizon > 1e13)
            fail_numeric("critical_slope: horizon growth did not settle the indicator");
        return critical_slope(kind, spec, p, slope_tol, tol, horizon);
    }

    CriticalSlope out;
    out.p = p;
    out.alpha_star = 0.5 * (lo + hi);
    out.alpha_lo = lo;
    out.alpha_hi = hi;
    out.r_max_used = horizon;
    return out;
}

FastWindow fast_decay_window(const RadialProfile& prof, double n_tilde) {
    const double target = -(n_tilde - 2.0);
    double rho = prof.r_front();
    if (auto first = prof.first_event_radius(EventKind::DduZero)) rho = *first;

    std::size_t first_good = prof.size(), last_good = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i];
        if (r < 2.0 * rho || !(r > 0.0)) continue;
        const double u = prof.u[i];
        if (!(u > 0.0)) break;
        const double s = r * prof.du[i] / u;
        const bool good = std::abs(s - target) <= 0.08 * std::abs(target);
        if (good) {
            if (first_good == prof.size()) first_good = i;
            last_good = i;
        } else if (first_good != prof.size() && r > 4.0 * prof.r[first_good]) {
            break;  // the trajectory veered off the fast rate
        }
    }
    if (first_good >= last_good)
        fail_numeric("fast_decay_window: no fast-rate window on the tail");
    return FastWindow{prof.r[first_good], prof.r[last_good]};
}

std::vector<PhasePoint> emden_fowler_trajectory(const RadialProfile& prof, double p) {
    std::vector<PhasePoint> out;
    out.reserve(prof.size());
    const double a = 2.0 / (p - 1.0);
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i];
        if (!(r > 0.0)) continue;
        const double x = std::pow(r, a) * prof.u[i];
        const double dx = a * x + std::pow(r, a + 1.0) * prof.du[i];
        out.push_back(PhasePoint{std::log(r), x, dx});
    }
    return out;
}

void write_phase_csv(const std::vector<PhasePoint>& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail_invalid("cannot open '" + path + "' for writing");
    std::fprintf(f, "t,x,dx\n");
    for (const auto& q : traj) std::fprintf(f, "%.17g,%.17g,%.17g\n", q.t, q.x, q.dx);
    std::fclose(f);
}

std::string ShootingOutcome::to_json() const {
    nlohmann::json j;
    j["kind"] = crossed() ? "crossed_zero" : "positive_truncated";
    if (crossed()) j["rho"] = rho;
    if (tau) j["tau"] = *tau;
    if (sigma) j["sigma"] = *sigma;
    if (decay) {
        j["decay"] = {{"label", to_string(decay->label)},
                      {"fitted_exponent", decay->fitted_exponent},
                      {"fit_window", {decay->window_lo, decay->window_hi}}};
    }
    j["r_max_used"] = r_max_used;
    j["truncated"] = profile.truncated;
    return j.dump();
}

std::string CriticalSlope::to_json() const {
    nlohmann::json j;
    j["p"] = p;
    j["alpha_star"] = alpha_star;
    j["bracket"] = {alpha_lo, alpha_hi};
    j["r_max_used"] = r_max_used;
    return j.dump();
}

const char* to_string(DecayLabel label) {
    switch (label) {
        case DecayLabel::Fast: return "fast";
        case DecayLabel::Slow: return "slow";
        case DecayLabel::PseudoSlowOrUndetermined: return "pseudo_slow_or_undetermined";
    }
    return "?";
}

}  // namespace pucci
