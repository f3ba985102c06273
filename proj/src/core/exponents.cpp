#include "core/exponents.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "core/errors.hpp"

namespace pucci {

namespace {

double level_tol(const ExponentOptions& opts, int level) {
    return std::max(opts.tol_floor, opts.tol * std::pow(10.0, -level));
}

struct ProbeResult {
    bool below_critical;  // center shoot crossed zero below r_max
    double detail;        // zero radius or fitted decay exponent
    std::string verdict;
};

ProbeResult ball_probe(const OperatorSpec& spec, double p, double tol, double r_max) {
    RadialProfile prof = integrate_from_center(spec, p, 1.0, r_max, tol, StopRule{1, r_max});
    if (!prof.truncated) {
        const double rho = prof.events_of(EventKind::UZero).front().radius;
        return ProbeResult{true, rho, "crossed_zero"};
    }
    double fitted = 0.0;
    try {
        fitted = classify_decay(prof).fitted_exponent;
    } catch (const Error&) {
    }
    return ProbeResult{false, fitted, "positive_truncated"};
}

}  // namespace

std::pair<double, double> ball_exponent_bounds(const OperatorSpec& spec) {
    const double nt = dimension_like(spec);
    const double sob = sobolev_exponent(spec.dim);
    if (spec.branch == Branch::Minus) return {(nt + 2.0) / (nt - 2.0), sob};
    return {std::max(nt / (nt - 2.0), sob), (nt + 2.0) / (nt - 2.0)};
}

CriticalExponentEstimate critical_exponent_ball(const OperatorSpec& spec,
                                                const ExponentOptions& opts) {
    spec.validate();
    auto [blo, bhi] = ball_exponent_bounds(spec);
    const bool laplacian = spec.lambda_lo == spec.lambda_hi;
    double lo = blo, hi = bhi;
    if (hi - lo < 8 * opts.p_tol) {
        // degenerate a-priori interval (the Laplacian limit): widen around it
        const double mid = 0.5 * (lo + hi);
        lo = mid * 0.85;
        hi = mid * 1.15;
    }

    // endpoint sanity: indicator must differ across the bracket
    ProbeResult at_lo = ball_probe(spec, lo, opts.tol, opts.r_max);
    ProbeResult at_hi = ball_probe(spec, hi, opts.tol, opts.r_max);
    for (int widen = 0; widen < 6 && (!at_lo.below_critical || at_hi.below_critical); ++widen) {
        if (!at_lo.below_critical) {
            lo = 1.0 + (lo - 1.0) * 0.8;
            at_lo = ball_probe(spec, lo, opts.tol, opts.r_max);
        }
        if (at_hi.below_critical) {
            hi *= 1.2;
            at_hi = ball_probe(spec, hi, opts.tol, opts.r_max);
        }
    }
    if (!at_lo.below_critical || at_hi.below_critical)
        fail_numeric("critical_exponent_ball: indicator does not bracket a threshold");

    int level = 0;
    while (hi - lo > opts.p_tol) {
        const double mid = 0.5 * (lo + hi);
        if (ball_probe(spec, mid, level_tol(opts, level), opts.r_max).below_critical)
            lo = mid;
        else
            hi = mid;
        ++level;
    }

    CriticalExponentEstimate est;
    est.which = spec.branch == Branch::Minus ? ExponentWhich::PStarMinus : ExponentWhich::PStarPlus;
    est.value = 0.5 * (lo + hi);
    est.lo = lo;
    est.hi = hi;
    est.spec = spec;
    est.bound_lo = blo;
    est.bound_hi = bhi;
    est.r_max_used = opts.r_max;

    const double cert_tol = level_tol(opts, level);
    ProbeResult c_lo = ball_probe(spec, lo, cert_tol, opts.r_max);
    ProbeResult c_hi = ball_probe(spec, hi, cert_tol, opts.r_max);
    est.low_side = ExponentCertificate{lo, c_lo.verdict, c_lo.detail};
    est.high_side = ExponentCertificate{hi, c_hi.verdict, c_hi.detail};
    if (!c_lo.below_critical || c_hi.below_critical)
        fail_numeric("critical_exponent_ball: endpoint certificates failed re-verification");

    if (laplacian) {
        est.bounds_ok = std::abs(est.value - sobolev_exponent(spec.dim)) <= opts.p_tol;
    } else {
        est.bounds_ok = lo > blo && hi < bhi;
        if (!est.bounds_ok)
            fail_numeric("critical_exponent_ball: estimate escaped its a-priori bounds "
                         "(horizon starvation)");
    }
    return est;
}

double nodal_gap(const OperatorSpec& spec_plus, double p, const ExponentOptions& opts) {
    OperatorSpec s = spec_plus.with_branch(Branch::Plus);
    s.validate();
    BallSolution v = positive_ball_solution(s, p, std::min(opts.tol, 1e-9), opts.r_max);
    CriticalSlope a =
        critical_slope(ExteriorKind::MinusIVP, s, p, opts.slope_tol, std::min(opts.tol, 1e-9),
                       opts.r_max);
    return std::abs(v.boundary_slope) - a.alpha_star;
}

CriticalExponentEstimate critical_exponent_nodal(const OperatorSpec& spec_plus,
                                                 const ExponentOptions& opts) {
    OperatorSpec s = spec_plus.with_branch(Branch::Plus);
    s.validate();
    CriticalExponentEstimate em = critical_exponent_ball(s.with_branch(Branch::Minus), opts);
    CriticalExponentEstimate ep = critical_exponent_ball(s, opts);

    const double delta = std::max(3.0 * opts.p_tol, 5e-3);
    double lo = em.value + delta;
    double hi = ep.value - delta;
    if (hi - lo < 2 * opts.p_tol)
        fail_numeric("critical_exponent_nodal: no sign change (the two ball thresholds "
                     "coincide; the nodal threshold merges with them in this limit)");

    double g_lo = nodal_gap(s, lo, opts);
    double g_hi = nodal_gap(s, hi, opts);
    for (int push = 0; push < 4 && g_lo <= 0.0; ++push) {
        lo = em.value + delta * std::pow(0.5, push + 1);
        g_lo = nodal_gap(s, lo, opts);
    }
    for (int push = 0; push < 4 && g_hi >= 0.0; ++push) {
        hi = ep.value - delta * std::pow(0.5, push + 1);
        g_hi = nodal_gap(s, hi, opts);
    }
    if (g_lo <= 0.0 || g_hi >= 0.0)
        fail_numeric("critical_exponent_nodal: gap function has constant sign on the probe "
                     "bracket (tolerance starvation)");

    while (hi - lo > opts.p_tol) {
        const double mid = 0.5 * (lo + hi);
        const double g = nodal_gap(s, mid, opts);
        if (g > 0.0) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
            g_hi = g;
        }
    }

    CriticalExponentEstimate est;
    est.which = ExponentWhich::PStarStarPlus;
    est.value = 0.5 * (lo + hi);
    est.lo = lo;
    est.hi = hi;
    est.spec = s;
    est.bound_lo = em.value;
    est.bound_hi = ep.value;
    est.r_max_used = opts.r_max;
    est.low_side = ExponentCertificate{lo, "gap_positive", g_lo};
    est.high_side = ExponentCertificate{hi, "gap_negative", g_hi};
    est.bounds_ok = em.value < lo && hi < ep.value;
    return est;
}

ExponentTriple estimate_all_exponents(const OperatorSpec& base, const ExponentOptions& opts) {
    ExponentTriple t{critical_exponent_ball(base.with_branch(Branch::Minus), opts),
                     critical_exponent_ball(base.with_branch(Branch::Plus), opts),
                     critical_exponent_nodal(base.with_branch(Branch::Plus), opts)};
    return t;
}

std::string CriticalExponentEstimate::to_json() const {
    nlohmann::json j;
    j["which"] = to_string(which);
    j["value"] = value;
    j["bracket"] = {lo, hi};
    j["lambda"] = spec.lambda_lo;
    j["Lambda"] = spec.lambda_hi;
    j["N"] = spec.dim;
    j["branch"] = pucci::to_string(spec.branch);
    j["a_priori_bounds"] = {bound_lo, bound_hi};
    j["bounds_ok"] = bounds_ok;
    j["r_max_used"] = r_max_used;
    j["certificates"] = {{{"p", low_side.p}, {"verdict", low_side.verdict}, {"value", low_side.value}},
                         {{"p", high_side.p}, {"verdict", high_side.verdict}, {"value", high_side.value}}};
    return j.dump();
}

const char* to_string(ExponentWhich which) {
    switch (which) {
        case ExponentWhich::PStarMinus: return "p_star_minus";
        case ExponentWhich::PStarPlus: return "p_star_plus";
        case ExponentWhich::PStarStarPlus: return "p_star_star_plus";
    }
    return "?";
}

}  // namespace pucci
