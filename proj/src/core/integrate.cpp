#include "core/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "core/errors.hpp"

namespace pucci {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using State = std::array<double, 2>;  // (u, du)

struct RhsEval {
    State f;    // (du, ddu)
    double xi;  // residual whose sign equals sign(u'')
};

struct OdeSystem {
    OperatorSpec spec;
    double p;

    RhsEval eval(double r, const State& y) const {
        const double q = y[1] / r;
        const double xi =
            -(spec.dim - 1) * eigenvalue_weight(spec, q) * q - signed_power(y[0], p);
        const double ddu = xi / eigenvalue_weight(spec, xi);
        return RhsEval{State{y[1], ddu}, xi};
    }
};

// Dormand-Prince 5(4) tableau with the standard quartic dense output.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784,
                 A76 = 11.0 / 84;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;
constexpr double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0,
                 D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0,
                 D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0;

// y(t) = q1 + t q2 + t(1-t) q3 + t^2(1-t) q4 + t^2(1-t)^2 q5,  t in [0,1]
struct DenseSegment {
    double r0 = 0, h = 0;
    State q1{}, q2{}, q3{}, q4{}, q5{};

    void eval(double radius, State& y, State& dy) const {
        const double t = std::clamp((radius - r0) / h, 0.0, 1.0);
        const double s = 1.0 - t;
        for (int i = 0; i < 2; ++i) {
            y[i] = q1[i] + t * q2[i] + t * s * q3[i] + t * t * s * q4[i] + t * t * s * s * q5[i];
            dy[i] = (q2[i] + (1 - 2 * t) * q3[i] + t * (2 - 3 * t) * q4[i] +
                     2 * t * s * (1 - 2 * t) * q5[i]) /
                    h;
        }
    }

    State value(double radius) const {
        State y, dy;
        eval(radius, y, dy);
        return y;
    }
};

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

enum Watch { kWatchU = 0, kWatchDu = 1, kWatchXi = 2, kWatchCount = 3 };

EventKind kind_of(int watch) {
    switch (watch) {
        case kWatchU: return EventKind::UZero;
        case kWatchDu: return EventKind::DuZero;
        default: return EventKind::DduZero;
    }
}

class Integrator {
public:
    Integrator(const OperatorSpec& spec, double p, double tol, StopRule stop)
        : sys_{spec, p}, tol_(tol), stop_(stop) {
        if (!(tol > 0.0)) fail_invalid("integrator: tolerance must be positive");
        if (!(stop.r_max > 0.0)) fail_invalid("integrator: r_max must be positive");
        prof_.spec = spec;
        prof_.p = p;
        prof_.tol = tol;
    }

    void push_prefix_point(double r, double u, double du) {
        prof_.r.push_back(r);
        prof_.u.push_back(u);
        prof_.du.push_back(du);
    }

    RadialProfile run(double r0, const State& y0, int initial_uzero_sign) {
        double r = r0;
        State y = y0;
        RhsEval f = sys_.eval(r, y);
        push_point(r, y);

        pending_sign_[kWatchU] = initial_uzero_sign;
        pending_sign_[kWatchDu] = 0;
        pending_sign_[kWatchXi] = 0;

        double h = initial_step(r, y, f);
        int rejected_in_row = 0;

        while (true) {
            const double span_left = stop_.r_max - r;
            if (span_left <= 256 * kEps * stop_.r_max) {
                prof_.truncated = true;
                break;
            }
            const double h_min = 64 * kEps * std::max(r, 1e-12);
            if (h < h_min && span_left > 4 * h_min)
                fail_numeric("integrator: step size underflow at r = " + std::to_string(r));
            h = std::min({h, step_cap(r), span_left});

            // one DOPRI5 attempt
            State k1 = f.f, k2, k3, k4, k5, k6, k7, y5;
            RhsEval f7;
            {
                State t;
                for (int i = 0; i < 2; ++i) t[i] = y[i] + h * A21 * k1[i];
                k2 = sys_.eval(r + C2 * h, t).f;
                for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
                k3 = sys_.eval(r + C3 * h, t).f;
                for (int i = 0; i < 2; ++i)
                    t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
                k4 = sys_.eval(r + C4 * h, t).f;
                for (int i = 0; i < 2; ++i)
                    t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
                k5 = sys_.eval(r + C5 * h, t).f;
                for (int i = 0; i < 2; ++i)
                    t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] +
                                       A65 * k5[i]);
                k6 = sys_.eval(r + h, t).f;
                for (int i = 0; i < 2; ++i)
                    y5[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] +
                                        A76 * k6[i]);
                f7 = sys_.eval(r + h, y5);
                k7 = f7.f;
            }

            // embedded error estimate against the local increment scale
            double err = 0.0, err_abs_u = 0.0;
            for (int i = 0; i < 2; ++i) {
                const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                                      E6 * k6[i] + E7 * k7[i]);
                const double sc = tol_ * (std::max(std::abs(y[i]), std::abs(y5[i])) +
                                          h * std::max(std::abs(k1[i]), std::abs(k7[i])) + 1e-300);
                err += (e / sc) * (e / sc);
                if (i == 0) err_abs_u = std::abs(e);
            }
            err = std::sqrt(0.5 * err);

            if (err > 1.0) {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (++rejected_in_row > 80)
                    fail_numeric("integrator: repeated step rejection at r = " +
                                 std::to_string(r));
                continue;
            }
            rejected_in_row = 0;

            DenseSegment seg;
            seg.r0 = r;
            seg.h = h;
            for (int i = 0; i < 2; ++i) {
                const double ydiff = y5[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                seg.q1[i] = y[i];
                seg.q2[i] = ydiff;
                seg.q3[i] = bspl;
                seg.q4[i] = ydiff - h * k7[i] - bspl;
                seg.q5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] +
                                 D7 * k7[i]);
            }

            // event scan on {u, du, xi}; the earliest root cuts the step
            const double w_left[kWatchCount] = {y[0], y[1], f.xi};
            const double w_right[kWatchCount] = {y5[0], y5[1], f7.xi};
            double best_radius = std::numeric_limits<double>::infinity();
            int best_watch = -1;

            for (int w = 0; w < kWatchCount; ++w) {
                int s_l = sign_of(w_left[w]);
                if (pending_sign_[w] != 0) s_l = pending_sign_[w];
                double root;
                if (find_root(seg, w, s_l, w_right[w], root) && root < best_radius) {
                    best_radius = root;
                    best_watch = w;
                }
            }

            if (best_watch >= 0) {
                State ye, dye;
                seg.eval(best_radius, ye, dye);
                int s_l = sign_of(w_left[best_watch]);
                if (pending_sign_[best_watch] != 0) s_l = pending_sign_[best_watch];
                int s_r = sign_of(w_right[best_watch]);
                if (s_r == 0 || s_r == s_l) s_r = -s_l;

                if (best_watch == kWatchU) {
                    // A transversal crossing keeps u' near its step-local
                    // scale; a tangential one does not and cannot be
                    // separated from a double root at this tolerance.
                    const double du_local = std::max(std::abs(y[1]), std::abs(y5[1]));
                    if (std::abs(ye[1]) < tol_ * du_local)
                        fail_numeric("integrator: grazing zero of u at r = " +
                                     std::to_string(best_radius) + " (tolerance starvation)");
                    ye[0] = 0.0;
                } else if (best_watch == kWatchDu) {
                    ye[1] = 0.0;
                }
                for (int w = 0; w < kWatchCount; ++w) pending_sign_[w] = 0;
                pending_sign_[best_watch] = s_r;

                const double frac = std::min(1.0, (best_radius - seg.r0) / h);
                r = best_radius;
                y = ye;
                f = sys_.eval(r, y);
                push_point(r, y);
                prof_.events.push_back(Event{kind_of(best_watch), r, s_l, s_r});
                prof_.err_abs_u += err_abs_u * frac;
                prof_.err_rel += err * tol_;

                if (best_watch == kWatchU) {
                    ++uzeros_;
                    if (stop_.uzero_count > 0 && uzeros_ >= stop_.uzero_count) {
                        prof_.truncated = false;
                        break;
                    }
                }
                h = std::max(0.25 * h, 8 * h_min);
                continue;
            }

            r += h;
            y = y5;
            f = f7;
            push_point(r, y);
            prof_.err_abs_u += err_abs_u;
            prof_.err_rel += err * tol_;
            for (int w = 0; w < kWatchCount; ++w) pending_sign_[w] = 0;
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        }

        self_check();
        return std::move(prof_);
    }

private:
    void push_point(double r, const State& y) {
        prof_.r.push_back(r);
        prof_.u.push_back(y[0]);
        prof_.du.push_back(y[1]);
        du_scale_ = std::max(du_scale_, std::abs(y[1]));
    }

    double step_cap(double r) const { return 0.2 * r + 1e-3; }

    double initial_step(double r, const State& y, const RhsEval& f) const {
        const double scale = std::abs(y[0]) + std::abs(y[1]) + 1e-6;
        const double dscale = std::abs(f.f[0]) + std::abs(f.f[1]) + 1e-6;
        const double h = 1e-2 * scale / dscale;
        return std::clamp(h, 1e-8 * std::max(1.0, r), step_cap(r));
    }

    double watch_value(const DenseSegment& seg, int watch, double radius) const {
        State y = seg.value(radius);
        if (watch == kWatchU) return y[0];
        if (watch == kWatchDu) return y[1];
        return sys_.eval(radius, y).xi;
    }

    // First sign change of the watch inside the segment; the interior is
    // pre-sampled so an excursion that returns within one step is caught.
    bool find_root(const DenseSegment& seg, int watch, int s_left, double w_right,
                   double& root) const {
        constexpr int kSamples = 4;
        double prev_x = seg.r0;
        int prev_s = s_left;
        for (int j = 1; j <= kSamples; ++j) {
            const double x = seg.r0 + seg.h * (double(j) / kSamples);
            const int s =
                j == kSamples ? sign_of(w_right) : sign_of(watch_value(seg, watch, x));
            if (prev_s != 0 && s != 0 && s != prev_s) {
                root = bisect(seg, watch, prev_x, x, prev_s);
                return true;
            }
            if (prev_s != 0 && s == 0) {
                root = x;
                return true;
            }
            if (s != 0) {
                prev_s = s;
                prev_x = x;
            }
        }
        return false;
    }

    double bisect(const DenseSegment& seg, int watch, double lo, double hi, int s_lo) const {
        const double tol_loc = std::max(4 * kEps * std::abs(hi), 1e-13 * std::max(1.0, hi));
        for (int it = 0; it < 90 && hi - lo > tol_loc; ++it) {
            const double mid = 0.5 * (lo + hi);
            const int s = sign_of(watch_value(seg, watch, mid));
            if (s == 0) return mid;
            if (s == s_lo)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    void self_check() const {
        const double worst = h_diagnostic_worst_increase(prof_);
        if (worst > 100 * tol_)
            fail_internal(
                "integrator: monotone energy diagnostic violated (worst relative increase " +
                std::to_string(worst) + ")");
    }

    OdeSystem sys_;
    double tol_;
    StopRule stop_;
    RadialProfile prof_;
    int uzeros_ = 0;
    int pending_sign_[kWatchCount] = {0, 0, 0};
    double du_scale_ = 0.0;
};

}  // namespace

Branch branch_of(ExteriorKind k) {
    return k == ExteriorKind::MinusIVP ? Branch::Minus : Branch::Plus;
}

ExteriorKind exterior_kind_for_gluing(Branch nodal_branch) {
    return nodal_branch == Branch::Minus ? ExteriorKind::PlusIVP : ExteriorKind::MinusIVP;
}

RadialProfile integrate_from_center(const OperatorSpec& spec, double p, double u0, double r_max,
                                    double tol, StopRule stop) {
    spec.validate();
    if (!(u0 > 0.0)) fail_invalid("integrate_from_center: u0 must be positive");
    if (!(p > 1.0)) fail_invalid("integrate_from_center: exponent p must exceed 1");
    stop.r_max = r_max;

    // Second-order series start: u''(0) = -u0^p / (c N) with the concave
    // regime weight c; the O(r_start^4) remainder sits below tol.
    const double c = concave_weight(spec);
    const double r_start = std::max(std::pow(tol, 0.25), 1e-6);
    const double curv = -signed_power(u0, p) / (c * spec.dim);
    const double us = u0 + 0.5 * curv * r_start * r_start;
    const double dus = curv * r_start;

    Integrator ig(spec, p, tol, stop);
    ig.push_prefix_point(0.0, u0, 0.0);
    return ig.run(r_start, {us, dus}, /*initial_uzero_sign=*/1);
}

RadialProfile integrate_exterior(ExteriorKind kind, const OperatorSpec& spec, double p,
                                 double alpha, double r_max, double tol) {
    OperatorSpec s = spec.with_branch(branch_of(kind));
    s.validate();
    if (!(alpha > 0.0)) fail_invalid("integrate_exterior: slope alpha must be positive");
    if (!(p > 1.0)) fail_invalid("integrate_exterior: exponent p must exceed 1");

    Integrator ig(s, p, tol, StopRule{1, r_max});
    return ig.run(1.0, {0.0, alpha}, /*initial_uzero_sign=*/1);
}

double h_diagnostic_worst_increase(const RadialProfile& prof) {
    const std::size_t n = prof.size();
    if (n < 2) return 0.0;
    double worst = 0.0;
    const double pw = prof.p + 1.0;

    auto weight_at = [&](std::size_t i) -> double {
        const double q = prof.du[i] / prof.r[i];
        const double xi = -(prof.spec.dim - 1) * eigenvalue_weight(prof.spec, q) * q -
                          signed_power(prof.u[i], prof.p);
        return eigenvalue_weight(prof.spec, xi);
    };

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (prof.r[i] <= 0.0) continue;
        const bool declining =
            prof.u[i] * prof.du[i] <= 0.0 && prof.u[i + 1] * prof.du[i + 1] <= 0.0;
        if (!declining) continue;
        const double c0 = weight_at(i);
        if (c0 != weight_at(i + 1)) continue;  // regime switch between the points
        auto H = [&](std::size_t j) {
            return 0.5 * prof.du[j] * prof.du[j] + std::pow(std::abs(prof.u[j]), pw) / (c0 * pw);
        };
        const double h0 = H(i), h1 = H(i + 1);
        if (h1 > h0) worst = std::max(worst, (h1 - h0) / std::max(h0, 1e-300));
    }
    return worst;
}

const char* to_string(ExteriorKind k) { return k == ExteriorKind::MinusIVP ? "minus" : "plus"; }

}  // namespace pucci
