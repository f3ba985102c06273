#include "core/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace pucci {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;
}

double weight_gamma(double p, int dim) {
    if (!(p > 1.0)) fail_invalid("weight_gamma: exponent p must exceed 1");
    return 2.0 * (p + 1.0) / (p - 1.0) - dim;
}

double sphere_surface_measure(int dim) {
    if (dim < 1) fail_invalid("sphere_surface_measure: dimension must be positive");
    return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

namespace {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Simpson on [a,b]; fn must be smooth inside (kinks are cell
// boundaries by construction).
template <typename Fn>
void simpson_rec(const Fn& fn, double a, double b, double fa, double fm, double fb, double whole,
                 double eps, int depth, QuadResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
        out.value += left + right + delta / 15.0;
        out.error += std::abs(delta) / 15.0;
        return;
    }
    simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, out);
    simpson_rec(fn, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, out);
}

template <typename Fn>
QuadResult simpson_cell(const Fn& fn, double a, double b, double eps) {
    QuadResult out;
    if (b <= a) return out;
    const double m = 0.5 * (a + b);
    const double fa = fn(a), fm = fn(m), fb = fn(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(fn, a, b, fa, fm, fb, whole, eps, 28, out);
    return out;
}

// Integrate fn over [a,b] splitting at the profile grid points and at the
// extra break radii.
template <typename Fn>
QuadResult integrate_cells(const RadialProfile& prof, const Fn& fn, double a, double b,
                           std::vector<double> breaks, double quad_tol) {
    for (double r : prof.r)
        if (r > a && r < b) breaks.push_back(r);
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    // rough scale pass to distribute the tolerance
    double rough = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] < a || breaks[i] > b) continue;
        const double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
        if (hi <= lo) continue;
        rough += (hi - lo) / 6.0 *
                 (fn(lo) + 4.0 * fn(0.5 * (lo + hi)) + fn(hi));
    }
    const double eps_total = quad_tol * std::max(std::abs(rough), 1e-30);

    QuadResult out;
    const double span = b - a;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
        if (hi <= lo) continue;
        QuadResult cell = simpson_cell(fn, lo, hi, eps_total * ((hi - lo) / span));
        out.value += cell.value;
        out.error += cell.error;
    }
    return out;
}

// Count concavity changes of the profile strictly inside (a,b) and return
// the unique one; relies on the recorded events.
double region_inflection(const RadialProfile& prof, double a, double b) {
    std::vector<double> in;
    for (const auto& e : prof.events)
        if (e.kind == EventKind::DduZero && e.radius > a && e.radius < b)
            in.push_back(e.radius);
    if (in.empty())
        fail_numeric("region_energy: region has no interior concavity change");
    if (in.size() > 1)
        fail_numeric("region_energy: region changes concavity more than once");
    return in.front();
}

}  // namespace

RegionEnergy region_energy(const RadialProfile& prof, double a, double b, double p, int dim,
                           double quad_tol) {
    if (!(b > a) || a < 0.0) fail_invalid("region_energy: bad region bounds");
    const double fuzz = 1e-9 * std::max(1.0, prof.r_back());
    if (a < prof.r_front() - fuzz || b > prof.r_back() + fuzz)
        fail_invalid("region_energy: region outside the profile span");
    a = std::max(a, prof.r_front());
    b = std::min(b, prof.r_back());

    RegionEnergy out;
    out.a = a;
    out.b = b;
    out.gamma = weight_gamma(p, dim);

    // trivial region
    double sup = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i)
        if (prof.r[i] >= a && prof.r[i] <= b) sup = std::max(sup, std::abs(prof.u[i]));
    if (sup == 0.0) {
        out.inflection = 0.5 * (a + b);
        out.value = 0.0;
        return out;
    }

    // constant sign inside the region
    for (const auto& e : prof.events)
        if (e.kind == EventKind::UZero && e.radius > a + fuzz && e.radius < b - fuzz)
            fail_numeric("region_energy: sign change inside the region");

    const double rho = region_inflection(prof, a, b);
    out.inflection = rho;

    const double omega = sphere_surface_measure(dim);
    const double gamma = out.gamma;
    const double plateau = std::pow(rho, gamma);
    auto integrand = [&](double r) -> double {
        const double g = r <= rho ? plateau : std::pow(r, gamma);
        const double u = std::abs(prof.value_at(r));
        return omega * std::pow(u, p + 1.0) * g * std::pow(r, dim - 1.0);
    };
    QuadResult q = integrate_cells(prof, integrand, a, b, {rho}, quad_tol);
    out.value = q.value;
    out.quad_error = q.error;
    return out;
}

EnergyReport total_energy(const RadialProfile& prof, const NodalDecomposition& d, double p,
                          int dim, double quad_tol) {
    EnergyReport rep;
    for (int region = 0; region < d.k; ++region) {
        const double a = region == 0 ? 0.0 : d.nodal_radii[region - 1];
        const double b = region == d.k - 1 ? prof.r_back() : d.nodal_radii[region];
        try {
            RegionEnergy e = region_energy(prof, a, b, p, dim, quad_tol);
            rep.per_region.push_back(e);
            rep.total += e.value;
            rep.error_estimate += e.quad_error;
        } catch (const Error& err) {
            fail_numeric("total_energy: region " + std::to_string(region + 1) + ": " +
                         err.what());
        }
    }
    return rep;
}

namespace {

struct TailFit {
    double r_trunc;
    double c_tail;
};

// Locate the clean fast-decay window of a positive decaying tail, then
// choose the truncation radius inside it so the analytic tail remainder is
// small against the rough energy.
TailFit fast_tail_fit(const RadialProfile& prof, double n_tilde, double rho,
                      double r_trunc_override) {
    FastWindow win;
    try {
        win = fast_decay_window(prof, n_tilde);
    } catch (const Error&) {
        fail_numeric("energy tail: no clean fast-decay window (decay not fast at this "
                     "exponent; threshold estimate too coarse?)");
    }
    const double w_hi = win.hi;
    const double w_lo = win.lo;
    if (w_hi < 10.0 * w_lo || w_hi < 15.0 * rho)
        fail_numeric("energy tail: fast-decay window too short (decay not fast at this "
                     "exponent; threshold estimate too coarse?)");

    double r_trunc = r_trunc_override > 0.0 ? std::min(r_trunc_override, w_hi)
                                            : std::max(w_hi / 3.0, std::min(20.0 * rho, w_hi));
    r_trunc = std::max(r_trunc, 4.0 * rho);

    // fit the constant of u ~ c r^{-(Nt-2)} over the last decade below r_trunc
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i];
        if (r < std::max(r_trunc / 10.0, w_lo) || r > r_trunc) continue;
        if (!(prof.u[i] > 0.0)) break;
        acc += std::log(prof.u[i]) + (n_tilde - 2.0) * std::log(r);
        ++n;
    }
    if (n < 4) fail_numeric("energy tail: too few samples for the tail-constant fit");
    return TailFit{r_trunc, std::exp(acc / double(n))};
}

SigmaEstimate sigma_from_profile(const RadialProfile& prof, double p, double inner_radius,
                                 double n_tilde, double quad_tol, double r_trunc_override) {
    const int dim = prof.spec.dim;
    const double gamma = weight_gamma(p, dim);

    // The underlying fast solution changes concavity once; the approximating
    // trajectory may oscillate again far out when it departs toward the slow
    // regime, so the plateau anchors at the first change and the truncation
    // radius stays inside the clean window before the departure.
    auto rho_opt = prof.first_event_radius(EventKind::DduZero);
    if (!rho_opt) fail_numeric("sigma estimate: trajectory never changes concavity");
    const double rho = *rho_opt;

    const double tail_exp = (n_tilde - 2.0) * (p + 1.0) - gamma - dim;
    if (!(tail_exp > 0.0))
        fail_numeric("sigma estimate: tail integral diverges at this exponent");

    TailFit fit = fast_tail_fit(prof, n_tilde, rho, r_trunc_override);

    const double omega = sphere_surface_measure(dim);
    const double plateau = std::pow(rho, gamma);
    auto integrand = [&](double r) -> double {
        const double g = r <= rho ? plateau : std::pow(r, gamma);
        const double u = std::abs(prof.value_at(r));
        return omega * std::pow(u, p + 1.0) * g * std::pow(r, dim - 1.0);
    };
    QuadResult q =
        integrate_cells(prof, integrand, inner_radius, fit.r_trunc, {rho}, quad_tol);

    SigmaEstimate est;
    est.main_part = q.value;
    est.quad_error = q.error;
    est.r_trunc = fit.r_trunc;
    est.c_tail = fit.c_tail;
    est.inflection = rho;
    est.tail_exponent = tail_exp;
    est.tail_estimate = omega * std::pow(fit.c_tail, p + 1.0) *
                        std::pow(fit.r_trunc, -tail_exp) / tail_exp;
    est.value = est.main_part + est.tail_estimate;
    return est;
}

}  // namespace

SigmaEstimate entire_space_energy(const OperatorSpec& spec, double p_star, double tol,
                                  double quad_tol, double r_max, double r_trunc_override) {
    spec.validate();
    RadialProfile prof =
        integrate_from_center(spec, p_star, 1.0, r_max, tol, StopRule{1, r_max});
    return sigma_from_profile(prof, p_star, 0.0, dimension_like(spec), quad_tol,
                              r_trunc_override);
}

SigmaEstimate exterior_energy(const OperatorSpec& spec, double p_star_star, double alpha,
                              double tol, double quad_tol, double r_max,
                              double r_trunc_override) {
    OperatorSpec s = spec.with_branch(Branch::Minus);
    s.validate();
    RadialProfile prof =
        integrate_exterior(ExteriorKind::MinusIVP, s, p_star_star, alpha, r_max, tol);
    SigmaEstimate est = sigma_from_profile(prof, p_star_star, 1.0,
                                           dimension_like(s, Branch::Minus), quad_tol,
                                           r_trunc_override);
    if (!(est.inflection > 1.0))
        fail_numeric("exterior_energy: concavity change not strictly outside the unit sphere");
    return est;
}

const CriticalExponentEstimate& ensure_p_star(CriticalContext& ctx, const OperatorSpec& base,
                                              Branch branch, const ExponentOptions& opts) {
    auto& slot = branch == Branch::Minus ? ctx.p_star_minus : ctx.p_star_plus;
    if (!slot) slot = critical_exponent_ball(base.with_branch(branch), opts);
    return *slot;
}

const CriticalExponentEstimate& ensure_p_star_star(CriticalContext& ctx,
                                                   const OperatorSpec& base,
                                                   const ExponentOptions& opts) {
    if (!ctx.p_star_star_plus) {
        // reuse the ball estimates when already present
        if (ctx.p_star_minus && ctx.p_star_plus) {
            ctx.p_star_star_plus = critical_exponent_nodal(base.with_branch(Branch::Plus), opts);
        } else {
            ensure_p_star(ctx, base, Branch::Minus, opts);
            ensure_p_star(ctx, base, Branch::Plus, opts);
            ctx.p_star_star_plus = critical_exponent_nodal(base.with_branch(Branch::Plus), opts);
        }
    }
    return *ctx.p_star_star_plus;
}

const CriticalSlope& ensure_nodal_slope(CriticalContext& ctx, const OperatorSpec& base,
                                        const ExponentOptions& opts) {
    if (!ctx.slope_at_nodal_threshold) {
        const auto& pss = ensure_p_star_star(ctx, base, opts);
        ctx.slope_at_nodal_threshold =
            critical_slope(ExteriorKind::MinusIVP, base, pss.value, opts.slope_tol,
                           std::min(opts.tol, 1e-9), opts.r_max);
    }
    return *ctx.slope_at_nodal_threshold;
}

const SigmaEstimate& ensure_sigma_star_minus(CriticalContext& ctx, const OperatorSpec& base,
                                             const ExponentOptions& opts) {
    if (!ctx.sigma_star_minus) {
        // The entire-space constant needs the threshold located finely enough
        // that the shoot hugs the fast solution across a full decade.
        ExponentOptions fine = opts;
        fine.p_tol = std::min(opts.p_tol, 1e-4);
        CriticalExponentEstimate pm =
            critical_exponent_ball(base.with_branch(Branch::Minus), fine);
        if (!ctx.p_star_minus) ctx.p_star_minus = pm;
        ctx.sigma_star_minus =
            entire_space_energy(base.with_branch(Branch::Minus), pm.value, 1e-10, 1e-8,
                                opts.r_max);
    }
    return *ctx.sigma_star_minus;
}

const SigmaEstimate& ensure_sigma_star_star(CriticalContext& ctx, const OperatorSpec& base,
                                            const ExponentOptions& opts) {
    if (!ctx.sigma_star_star_plus) {
        const auto& pss = ensure_p_star_star(ctx, base, opts);
        const auto& slope = ensure_nodal_slope(ctx, base, opts);
        // the truncating endpoint of the slope bracket keeps the trajectory
        // positive along the whole fast window
        const double alpha = slope.alpha_lo > 0.0 ? slope.alpha_lo : slope.alpha_star;
        ctx.sigma_star_star_plus =
            exterior_energy(base, pss.value, alpha, 1e-10, 1e-8, opts.r_max);
    }
    return *ctx.sigma_star_star_plus;
}

EnergyLimitTable energy_limit_experiment(const OperatorSpec& spec, int k,
                                         const std::vector<double>& epsilons,
                                         CriticalContext& ctx, const ExponentOptions& opts,
                                         double quad_tol, int jobs) {
    spec.validate();
    if (k < 2) fail_invalid("energy_limit_experiment: needs k >= 2");
    if (epsilons.empty()) fail_invalid("energy_limit_experiment: empty epsilon list");

    // Ball solutions exactly at an estimated threshold are ill-posed; the
    // limit objects are computed a hair inside the existence region.
    constexpr double kInside = 1e-4;

    EnergyLimitTable out;
    double p_crit;

    if (spec.branch == Branch::Minus) {
        const auto& pm = ensure_p_star(ctx, spec, Branch::Minus, opts);
        p_crit = pm.value;
        const auto& sigma = ensure_sigma_star_minus(ctx, spec, opts);
        out.sigma = sigma.value;
        const double p_lim = pm.value - kInside;
        if (k == 2) {
            BallSolution neg = positive_ball_solution(spec.with_branch(Branch::Plus), p_lim);
            NodalDecomposition d;
            d.k = 1;
            d.extremum_radii = {0.0};
            d.extremum_values = {neg.sup()};
            out.ball_energy = total_energy(neg.profile, d, p_lim, spec.dim, quad_tol).total;
        } else {
            NodalSolution bar = build_nodal(spec.with_branch(Branch::Plus), p_lim, k - 1);
            out.ball_energy =
                total_energy(bar.profile, bar.decomposition, p_lim, spec.dim, quad_tol).total;
        }
        out.predicted_limit = sigma.value + out.ball_energy;
    } else {
        const auto& pss = ensure_p_star_star(ctx, spec, opts);
        p_crit = pss.value;
        const auto& sigma = ensure_sigma_star_star(ctx, spec, opts);
        out.sigma = sigma.value;
        const double p_lim = pss.value - kInside;
        BallSolution vbar = positive_ball_solution(spec.with_branch(Branch::Plus), p_lim);
        NodalDecomposition d;
        d.k = 1;
        d.extremum_radii = {0.0};
        d.extremum_values = {vbar.sup()};
        out.ball_energy = total_energy(vbar.profile, d, p_lim, spec.dim, quad_tol).total;
        if (k % 2 == 0)
            out.predicted_limit = 0.5 * k * (out.ball_energy + sigma.value);
        else
            out.predicted_limit =
                0.5 * (k + 1) * out.ball_energy + 0.5 * (k - 1) * sigma.value;
    }

    out.rows.resize(epsilons.size());
    parallel_for(epsilons.size(), jobs, [&](std::size_t i) {
        EnergyLimitRecord& rec = out.rows[i];
        rec.epsilon = epsilons[i];
        rec.p = p_crit - epsilons[i];
        try {
            NodalSolution sol = build_nodal(spec, rec.p, k);
            rec.total =
                total_energy(sol.profile, sol.decomposition, rec.p, spec.dim, quad_tol).total;
            rec.predicted = out.predicted_limit;
            rec.gap = std::abs(rec.total - rec.predicted);
            rec.gap_rel = rec.gap / std::abs(rec.predicted);
            rec.ok = true;
        } catch (const Error& e) {
            rec.error = e.what();
        }
    });
    return out;
}

Table EnergyLimitTable::table() const {
    Table t;
    t.add_column("epsilon", "distance to the critical exponent");
    t.add_column("p", "probe exponent");
    t.add_column("ok", "1 when the build succeeded");
    t.add_column("E_total", "total weighted energy of the nodal solution");
    t.add_column("E_predicted_limit", "predicted limit energy");
    t.add_column("gap", "|E_total - E_predicted_limit|");
    t.add_column("gap_relative", "gap / |E_predicted_limit|");
    for (const auto& r : rows)
        t.add_row({r.epsilon, r.p, r.ok ? 1.0 : 0.0, r.ok ? r.total : kNaN, r.predicted, r.gap,
                   r.gap_rel});
    return t;
}

std::string EnergyReport::to_json() const {
    nlohmann::json j;
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& e : per_region)
        regions.push_back({{"a", e.a},
                           {"b", e.b},
                           {"inflection", e.inflection},
                           {"gamma", e.gamma},
                           {"value", e.value},
                           {"quad_error", e.quad_error}});
    j["per_region"] = regions;
    j["total"] = total;
    j["error_estimate"] = error_estimate;
    return j.dump();
}

std::string SigmaEstimate::to_json() const {
    nlohmann::json j;
    j["value"] = value;
    j["main_part"] = main_part;
    j["tail_estimate"] = tail_estimate;
    j["r_trunc"] = r_trunc;
    j["c_tail"] = c_tail;
    j["inflection"] = inflection;
    j["tail_exponent"] = tail_exponent;
    j["quad_error"] = quad_error;
    return j.dump();
}

}  // namespace pucci
