#include "core/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "core/errors.hpp"

namespace pucci {

namespace {

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

// Cubic Hermite basis on [0,1].
inline double hermite(double y0, double y1, double m0, double m1, double h, double t) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * m1;
}

inline double hermite_deriv(double y0, double y1, double m0, double m1, double h, double t) {
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * m0 + (-6 * t2 + 6 * t) * y1 +
            (3 * t2 - 2 * t) * h * m1) /
           h;
}

}  // namespace

std::size_t RadialProfile::cell_index(double radius) const {
    if (r.size() < 2) fail_invalid("profile: need at least two grid points to interpolate");
    if (radius < r.front() - 1e-12 * std::max(1.0, std::abs(r.front())) ||
        radius > r.back() + 1e-12 * std::max(1.0, r.back()))
        fail_invalid("profile: radius outside the stored grid span");
    auto it = std::upper_bound(r.begin(), r.end(), radius);
    std::size_t i = it == r.begin() ? 0 : std::size_t(it - r.begin() - 1);
    if (i >= r.size() - 1) i = r.size() - 2;
    return i;
}

void RadialProfile::eval_at(double radius, double& u_out, double& du_out) const {
    const std::size_t i = cell_index(radius);
    const double h = r[i + 1] - r[i];
    const double t = std::clamp((radius - r[i]) / h, 0.0, 1.0);
    // du is the exact derivative of u along the trajectory, so the Hermite
    // cubic in u and its derivative stay consistent.
    u_out = hermite(u[i], u[i + 1], du[i], du[i + 1], h, t);
    du_out = hermite_deriv(u[i], u[i + 1], du[i], du[i + 1], h, t);
}

double RadialProfile::value_at(double radius) const {
    double a, b;
    eval_at(radius, a, b);
    return a;
}

double RadialProfile::derivative_at(double radius) const {
    double a, b;
    eval_at(radius, a, b);
    return b;
}

std::vector<Event> RadialProfile::events_of(EventKind kind) const {
    std::vector<Event> out;
    for (const auto& e : events)
        if (e.kind == kind) out.push_back(e);
    return out;
}

std::optional<double> RadialProfile::first_event_radius(EventKind kind) const {
    for (const auto& e : events)
        if (e.kind == kind) return e.radius;
    return std::nullopt;
}

std::optional<double> RadialProfile::last_event_radius(EventKind kind) const {
    std::optional<double> out;
    for (const auto& e : events)
        if (e.kind == kind) out = e.radius;
    return out;
}

RadialProfile RadialProfile::rescaled(double a) const {
    if (!(a > 0.0)) fail_invalid("profile rescale: factor must be positive");
    RadialProfile out = *this;
    const double cu = std::pow(a, 2.0 / (p - 1.0));
    const double cdu = std::pow(a, (p + 1.0) / (p - 1.0));
    for (std::size_t i = 0; i < r.size(); ++i) {
        out.r[i] = r[i] / a;
        out.u[i] = cu * u[i];
        out.du[i] = cdu * du[i];
    }
    for (auto& e : out.events) e.radius /= a;
    out.err_abs_u *= cu;
    return out;
}

RadialProfile RadialProfile::truncated_to(double r_cut) const {
    RadialProfile out = *this;
    out.r.clear();
    out.u.clear();
    out.du.clear();
    out.events.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] > r_cut) break;
        out.r.push_back(r[i]);
        out.u.push_back(u[i]);
        out.du.push_back(du[i]);
    }
    if (out.r.size() < 2) fail_invalid("truncated_to: cut radius before the grid start");
    for (const auto& e : events)
        if (e.radius <= out.r.back()) out.events.push_back(e);
    out.truncated = true;
    return out;
}

double RadialProfile::event_radius_error_estimate(double du_zero) const {
    // Sum of local error estimates converted to a radius shift through the
    // crossing slope, inflated by a safety factor for modal growth, plus the
    // localization tolerance of the root itself.
    const double loc = 1e-12 * std::max(1.0, r.back());
    if (du_zero == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * err_abs_u / std::abs(du_zero) + loc;
}

void RadialProfile::write_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail_invalid("cannot open '" + path + "' for writing");
    std::fprintf(f, "r,u,du\n");
    for (std::size_t i = 0; i < r.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", r[i], u[i], du[i]);
    std::fclose(f);
}

std::string RadialProfile::sidecar_json() const {
    nlohmann::json j;
    j["lambda"] = spec.lambda_lo;
    j["Lambda"] = spec.lambda_hi;
    j["N"] = spec.dim;
    j["branch"] = to_string(spec.branch);
    j["p"] = p;
    j["tol"] = tol;
    j["truncated"] = truncated;
    j["points"] = r.size();
    j["r_span"] = {r.empty() ? 0.0 : r.front(), r.empty() ? 0.0 : r.back()};
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : events)
        ev.push_back({{"kind", to_string(e.kind)},
                      {"radius", e.radius},
                      {"sign_before", e.sign_before},
                      {"sign_after", e.sign_after}});
    j["events"] = ev;
    return j.dump();
}

void RadialProfile::write_sidecar_json(const std::string& path) const {
    std::ofstream f(path);
    if (!f) fail_invalid("cannot open '" + path + "' for writing");
    f << sidecar_json() << "\n";
}

namespace {

// Bisect a sign change of fn on [lo, hi] (fn(lo) and fn(hi) of opposite sign).
template <typename Fn>
double bisect_root(Fn&& fn, double lo, double hi, double flo) {
    for (int it = 0; it < 120 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<Event> locate_events(const RadialProfile& prof) {
    std::vector<Event> out;
    const std::size_t n = prof.size();
    if (n < 2) return out;

    auto u_at = [&](double x) { return prof.value_at(x); };
    auto du_at = [&](double x) { return prof.derivative_at(x); };
    auto ddu_at = [&](double x) {
        double uu, dd;
        prof.eval_at(x, uu, dd);
        return resolve_second_derivative(prof.spec, x, uu, dd, prof.p);
    };

    double u_scale = 0.0, du_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        u_scale = std::max(u_scale, std::abs(prof.u[i]));
        du_scale = std::max(du_scale, std::abs(prof.du[i]));
    }
    const double graze = 1e3 * prof.tol;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (prof.r[i] <= 0.0) continue;  // resolver needs r > 0; u, du handled below too
        const double a = prof.r[i], b = prof.r[i + 1];

        auto emit = [&](EventKind kind, auto&& fn, double va, double vb) {
            if (va == 0.0 || vb == 0.0 || (va > 0) == (vb > 0)) return;
            const double root = bisect_root(fn, a, b, va);
            out.push_back(Event{kind, root, sign_of(va), sign_of(vb)});
        };

        emit(EventKind::UZero, u_at, prof.u[i], prof.u[i + 1]);
        emit(EventKind::DuZero, du_at, prof.du[i], prof.du[i + 1]);
        emit(EventKind::DduZero, ddu_at, ddu_at(a), ddu_at(b));

        // Tangential near-zero of u: a local magnitude dip below the noise
        // floor without a sign change is flagged, not dropped.
        if (i > 0 && std::abs(prof.u[i]) < graze * u_scale &&
            std::abs(prof.du[i]) < graze * du_scale && sign_of(prof.u[i - 1]) == sign_of(prof.u[i + 1]) &&
            sign_of(prof.u[i]) == sign_of(prof.u[i + 1])) {
            out.push_back(Event{EventKind::Undetermined, prof.r[i], sign_of(prof.u[i - 1]),
                                sign_of(prof.u[i + 1])});
        }
    }

    // u-zeros in the leading cell when it starts at r = 0
    if (prof.r[0] <= 0.0 && n >= 2 && prof.u[0] != 0.0 && prof.u[1] != 0.0 &&
        (prof.u[0] > 0) != (prof.u[1] > 0)) {
        const double root = bisect_root(u_at, prof.r[0], prof.r[1], prof.u[0]);
        out.push_back(Event{EventKind::UZero, root, sign_of(prof.u[0]), sign_of(prof.u[1])});
    }

    std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.radius < b.radius; });
    return out;
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::UZero: return "u_zero";
        case EventKind::DuZero: return "du_zero";
        case EventKind::DduZero: return "ddu_zero";
        case EventKind::Undetermined: return "undetermined";
    }
    return "?";
}

}  // namespace pucci
