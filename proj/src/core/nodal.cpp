#include "core/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace pucci {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void NodalDecomposition::check_interlacing() const {
    if (k < 1) fail_internal("nodal decomposition: empty");
    if (int(nodal_radii.size()) != k - 1 || int(extremum_radii.size()) != k ||
        int(extremum_values.size()) != k)
        fail_internal("nodal decomposition: inconsistent sizes");
    double prev = 0.0;
    if (extremum_radii[0] != 0.0) fail_internal("nodal decomposition: s_0 must be 0");
    for (int i = 1; i < k; ++i) {
        const double r = nodal_radii[i - 1];
        const double s = extremum_radii[i];
        if (!(prev < r && r < s && s < 1.0))
            fail_internal("nodal decomposition: interlacing 0 = s_0 < r_1 < s_1 < ... < 1 "
                          "violated");
        prev = s;
    }
    for (int i = 0; i < k; ++i)
        if (!(extremum_values[i] > 0.0))
            fail_internal("nodal decomposition: extremum magnitudes must be positive");
}

std::string NodalDecomposition::to_json() const {
    nlohmann::json j;
    j["k"] = k;
    j["nodal_radii"] = nodal_radii;
    j["extremum_radii"] = extremum_radii;
    j["extremum_values"] = extremum_values;
    j["inflection_radii"] = inflection_radii;
    return j.dump();
}

NodalSolution build_nodal(const OperatorSpec& spec, double p, int k, double tol, double r_max) {
    spec.validate();
    if (k < 1) fail_invalid("build_nodal: region count k must be at least 1");

    RadialProfile shoot = integrate_from_center(spec, p, 1.0, r_max, tol, StopRule{k, r_max});
    const auto zeros = shoot.events_of(EventKind::UZero);
    if (int(zeros.size()) < k)
        fail_numeric("zero_count_not_reached: " + std::to_string(zeros.size()) + " of " +
                     std::to_string(k) + " zeros below r_max");

    const double rho_k = zeros[k - 1].radius;
    NodalSolution out;
    out.shoot_zero_radius = rho_k;
    out.profile = shoot.rescaled(rho_k);
    out.boundary_slope = out.profile.du.back();

    NodalDecomposition d;
    d.k = k;
    for (int i = 0; i + 1 < k; ++i) d.nodal_radii.push_back(zeros[i].radius / rho_k);

    d.extremum_radii.push_back(0.0);
    d.extremum_values.push_back(std::abs(out.profile.u.front()));
    for (const auto& e : out.profile.events_of(EventKind::DuZero)) {
        d.extremum_radii.push_back(e.radius);
        d.extremum_values.push_back(std::abs(out.profile.value_at(e.radius)));
    }
    if (int(d.extremum_radii.size()) != k)
        fail_internal("build_nodal: expected " + std::to_string(k - 1) +
                      " interior extrema, found " +
                      std::to_string(d.extremum_radii.size() - 1));

    // one concavity change per region where present
    d.inflection_radii.assign(k, kNaN);
    const auto infl = out.profile.events_of(EventKind::DduZero);
    for (int region = 0; region < k; ++region) {
        const double a = region == 0 ? 0.0 : d.nodal_radii[region - 1];
        const double b = region == k - 1 ? 1.0 : d.nodal_radii[region];
        int found = 0;
        for (const auto& e : infl)
            if (e.radius > a && e.radius < b) {
                d.inflection_radii[region] = found ? kNaN : e.radius;
                ++found;
            }
        if (found > 1) d.inflection_radii[region] = kNaN;
    }

    d.check_interlacing();
    out.decomposition = std::move(d);
    return out;
}

ScalingIdentityReport scaling_identity_check(const NodalSolution& sol, const OperatorSpec& spec,
                                             double p, double tol) {
    if (sol.decomposition.k < 2)
        fail_invalid("scaling_identity_check: needs at least two nodal regions");
    BallSolution v = positive_ball_solution(spec, p, tol);

    const double r1 = sol.decomposition.nodal_radii[0];
    const double m0 = sol.decomposition.extremum_values[0];
    const double predicted_r1 = std::pow(v.sup() / m0, (p - 1.0) / 2.0);
    const double du_r1 = sol.profile.derivative_at(r1);
    const double lhs_slope = std::pow(r1, (p + 1.0) / (p - 1.0)) * du_r1;

    ScalingIdentityReport rep;
    rep.residual_node = std::abs(r1 - predicted_r1) / r1;
    rep.residual_slope = std::abs(lhs_slope - v.boundary_slope) / std::abs(v.boundary_slope);
    rep.m0 = m0;
    rep.ball_sup = v.sup();
    return rep;
}

std::vector<SweepRecord> concentration_sweep(const OperatorSpec& spec, int k,
                                             const std::vector<double>& epsilons, double p_crit,
                                             double tol, double r_max, int jobs) {
    if (epsilons.empty()) fail_invalid("concentration_sweep: empty epsilon list");
    std::vector<SweepRecord> out(epsilons.size());
    parallel_for(epsilons.size(), jobs, [&](std::size_t i) {
        SweepRecord& rec = out[i];
        rec.epsilon = epsilons[i];
        rec.p = p_crit - epsilons[i];
        try {
            if (!(rec.epsilon > 0.0)) fail_invalid("epsilon must be positive");
            NodalSolution sol = build_nodal(spec, rec.p, k, tol, r_max);
            rec.decomposition = sol.decomposition;
            rec.boundary_slope = sol.boundary_slope;
            const auto& d = sol.decomposition;
            const double m0 = d.extremum_values[0];
            const double half = (rec.p - 1.0) / 2.0;
            rec.r1_m0 = k >= 2 ? d.nodal_radii[0] * std::pow(m0, half) : kNaN;
            if (k >= 2) {
                const double m1 = d.extremum_values[1];
                const double f = std::pow(m1, half);
                rec.r1_hat = d.nodal_radii[0] * f;
                rec.s1_hat = d.extremum_radii[1] * f;
                rec.t1_hat = std::isnan(d.inflection_radii[1]) ? kNaN
                                                               : d.inflection_radii[1] * f;
            }
            for (int j = 0; j + 1 < k; ++j)
                rec.ratios.push_back(d.extremum_values[j] / d.extremum_values[j + 1]);
            rec.ok = true;
        } catch (const Error& e) {
            rec.error = e.what();
        }
    });
    return out;
}

Table concentration_table(const std::vector<SweepRecord>& records, int k) {
    Table t;
    t.add_column("epsilon", "distance to the critical exponent");
    t.add_column("p", "probe exponent");
    t.add_column("ok", "1 when the build succeeded");
    for (int i = 0; i < k; ++i)
        t.add_column("M" + std::to_string(i),
                     i == 0 ? "sup of |u| in the first nodal region" : "");
    for (int i = 1; i < k; ++i)
        t.add_column("r" + std::to_string(i), i == 1 ? "first nodal radius" : "");
    for (int i = 1; i < k; ++i)
        t.add_column("s" + std::to_string(i), i == 1 ? "extremum radius of region 2" : "");
    t.add_column("r1_M0", "r1 * M0^((p-1)/2)");
    t.add_column("r1_hat", "r1 * M1^((p-1)/2)");
    t.add_column("s1_hat", "s1 * M1^((p-1)/2)");
    t.add_column("t1_hat", "t1 * M1^((p-1)/2)");
    for (int i = 0; i + 1 < k; ++i)
        t.add_column("M" + std::to_string(i) + "_over_M" + std::to_string(i + 1), "");
    t.add_column("boundary_slope", "u'(1)");

    for (const auto& rec : records) {
        std::vector<double> row{rec.epsilon, rec.p, rec.ok ? 1.0 : 0.0};
        for (int i = 0; i < k; ++i)
            row.push_back(rec.ok ? rec.decomposition.extremum_values[i] : kNaN);
        for (int i = 1; i < k; ++i)
            row.push_back(rec.ok ? rec.decomposition.nodal_radii[i - 1] : kNaN);
        for (int i = 1; i < k; ++i)
            row.push_back(rec.ok ? rec.decomposition.extremum_radii[i] : kNaN);
        row.push_back(rec.ok ? rec.r1_m0 : kNaN);
        row.push_back(rec.ok ? rec.r1_hat : kNaN);
        row.push_back(rec.ok ? rec.s1_hat : kNaN);
        row.push_back(rec.ok ? rec.t1_hat : kNaN);
        for (int i = 0; i + 1 < k; ++i) row.push_back(rec.ok ? rec.ratios[i] : kNaN);
        row.push_back(rec.ok ? rec.boundary_slope : kNaN);
        t.add_row(std::move(row));
    }
    return t;
}

std::vector<PositiveSweepRecord> positive_solution_sweep(const OperatorSpec& spec,
                                                         const std::vector<double>& epsilons,
                                                         double p_crit, double tol, double r_max,
                                                         int jobs) {
    if (epsilons.empty()) fail_invalid("positive_solution_sweep: empty epsilon list");
    const double nt = dimension_like(spec);
    std::vector<PositiveSweepRecord> out(epsilons.size());
    parallel_for(epsilons.size(), jobs, [&](std::size_t i) {
        PositiveSweepRecord& rec = out[i];
        rec.epsilon = epsilons[i];
        rec.p = p_crit - epsilons[i];
        try {
            BallSolution v = positive_ball_solution(spec, rec.p, tol, r_max);
            rec.sup = v.sup();
            rec.boundary_slope = v.boundary_slope;
            const auto infl = v.profile.events_of(EventKind::DduZero);
            if (infl.size() != 1)
                fail_numeric("positive ball solution does not change concavity exactly once");
            rec.r0 = infl.front().radius;
            const double scale = std::pow(rec.r0, 2.0 / (rec.p - 1.0));
            const double u_r0 = v.profile.value_at(rec.r0);
            rec.r0_scaled_sup = scale * rec.sup;
            rec.u_r0_over_sup = u_r0 / rec.sup;
            rec.r0_scaled_u_r0 = scale * u_r0;
            rec.slope_normalized =
                std::pow(rec.sup, 0.5 * (rec.p * (nt - 2.0) - nt)) * v.boundary_slope;
            rec.ok = true;
        } catch (const Error& e) {
            rec.error = e.what();
        }
    });
    return out;
}

Table positive_sweep_table(const std::vector<PositiveSweepRecord>& records) {
    Table t;
    t.add_column("epsilon", "distance to the critical exponent");
    t.add_column("p", "probe exponent");
    t.add_column("ok", "1 when the solve succeeded");
    t.add_column("sup", "max of the positive ball solution");
    t.add_column("r0", "concavity-change radius");
    t.add_column("r0_scaled_sup", "r0^(2/(p-1)) * sup");
    t.add_column("u_r0_over_sup", "v(r0)/sup");
    t.add_column("r0_scaled_u_r0", "r0^(2/(p-1)) * v(r0)");
    t.add_column("slope_normalized", "sup^((p(Nt-2)-Nt)/2) * v'(1)");
    t.add_column("boundary_slope", "v'(1)");
    for (const auto& r : records)
        t.add_row({r.epsilon, r.p, r.ok ? 1.0 : 0.0, r.sup, r.r0, r.r0_scaled_sup,
                   r.u_r0_over_sup, r.r0_scaled_u_r0, r.slope_normalized, r.boundary_slope});
    return t;
}

DecayBoundReport decay_bound_check(const RadialProfile& prof) {
    const double nt = dimension_like(prof.spec);
    const double beta = (nt - 2.0) / 2.0;
    auto t_opt = prof.last_event_radius(EventKind::DduZero);
    if (!t_opt) fail_numeric("decay_bound_check: no concavity change located on the profile");
    const double t = *t_opt;

    // anchor on the first grid point safely past the concavity change (grid
    // values, not interpolants: the envelope slope is sensitive to u')
    std::size_t ia = prof.size();
    for (std::size_t i = 0; i < prof.size(); ++i)
        if (prof.r[i] >= 1.05 * t) {
            ia = i;
            break;
        }
    if (ia + 1 >= prof.size())
        fail_numeric("decay_bound_check: no tail past the concavity change");
    const double a = prof.r[ia];
    const double ua = prof.u[ia], dua = prof.du[ia];
    if (!(ua > 0.0) || !(dua < 0.0))
        fail_numeric("decay_bound_check: anchor state is not a positive decaying tail");

    // tangent construction: y = u^{-1/beta} satisfies dy/d(r^2) = -J/(nt-2)
    // with J = u^{-Nt/(Nt-2)} u'/r decreasing along the tail
    const double slope = -std::pow(ua, -nt / (nt - 2.0)) * dua / (a * (nt - 2.0));
    const double y_a = std::pow(ua, -2.0 / (nt - 2.0));
    const double k_const = y_a / slope - a * a + t * t;

    DecayBoundReport rep;
    rep.inflection = t;
    rep.c_fit = std::pow(slope, -beta);
    rep.k_fit = k_const;

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double r = prof.r[i];
        if (r < a) continue;
        const double u = prof.u[i];
        if (!(u > 0.0)) break;
        const double y = std::pow(u, -2.0 / (nt - 2.0));
        const double env = slope * (r * r - t * t + k_const);
        worst = std::min(worst, (y - env) / y);
    }
    rep.worst_margin = worst;
    // The exact fast solution is the equality case of the envelope, so the
    // verdict leaves room for trajectory drift; genuine slow tails miss by
    // many orders of magnitude.
    rep.holds = worst >= -1e-3;
    return rep;
}

}  // namespace pucci
