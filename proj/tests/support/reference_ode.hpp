#pragma once

// Independent reference integrator used only by the test suites.
//
// Fixed-step classical RK4 for the Laplacian-case radial equation
//
//     u'' = -(N-1) u'/r - |u|^{p-1} u / c,       u(0) = u0, u'(0) = 0,
//
// with Richardson extrapolation over a pair of step sizes (h, h/2).
// This deliberately shares no code with the solver library: it is the
// oracle the library is checked against, so it stays dumb and slow.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace refode {

struct State {
    double r;
    double u;
    double du;
};

inline double signed_pow(double u, double p) {
    if (u == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(u), p), u);
}

class LaplacianRadial {
public:
    LaplacianRadial(int dim, double p, double c = 1.0) : dim_(dim), p_(p), c_(c) {}

    // One RK4 step of the first-order system (u, du).
    State step(const State& s, double h) const {
        auto f = [this](double r, double u, double du, double& fu, double& fdu) {
            fu = du;
            fdu = -(dim_ - 1) * du / r - signed_pow(u, p_) / c_;
        };
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        f(s.r, s.u, s.du, k1u, k1v);
        f(s.r + h / 2, s.u + h / 2 * k1u, s.du + h / 2 * k1v, k2u, k2v);
        f(s.r + h / 2, s.u + h / 2 * k2u, s.du + h / 2 * k2v, k3u, k3v);
        f(s.r + h, s.u + h * k3u, s.du + h * k3v, k4u, k4v);
        return State{s.r + h,
                     s.u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u),
                     s.du + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)};
    }

    // Integrate from the series start at r0 to radius r_end with step h.
    State integrate_to(double u0, double r_end, double h) const {
        State s = series_start(u0, h);
        while (s.r < r_end - 1e-15 * r_end) {
            double hh = std::min(h, r_end - s.r);
            s = step(s, hh);
        }
        return s;
    }

    // Radius of the n-th sign change of u (n >= 1), located by stepping with
    // fixed h and bisecting the bracketing step.  Also reports u' there.
    struct Zero {
        double radius;
        double slope;
    };

    Zero nth_zero(double u0, int n, double h, double r_cap = 1e4) const {
        State s = series_start(u0, h);
        int found = 0;
        while (s.r < r_cap) {
            State next = step(s, h);
            if (s.u != 0.0 && next.u != 0.0 && (s.u > 0) != (next.u > 0)) {
                ++found;
                if (found == n) return bisect_zero(s, h);
            }
            s = next;
        }
        throw std::runtime_error("reference: zero not found below r_cap");
    }

    // Richardson-extrapolated n-th zero: combine radii at steps h and h/2
    // assuming O(h^4) error.
    Zero nth_zero_richardson(double u0, int n, double h) const {
        Zero a = nth_zero(u0, n, h);
        Zero b = nth_zero(u0, n, h / 2);
        return Zero{(16.0 * b.radius - a.radius) / 15.0,
                    (16.0 * b.slope - a.slope) / 15.0};
    }

    State series_start(double u0, double h) const {
        double r0 = std::min(1e-4, h);
        double a = -signed_pow(u0, p_) / (2.0 * c_ * dim_);
        return State{r0, u0 + a * r0 * r0, 2.0 * a * r0};
    }

private:
    Zero bisect_zero(State left, double h) const {
        double lo = 0.0, hi = h;
        for (int it = 0; it < 200 && (hi - lo) > 1e-16 * (left.r + hi); ++it) {
            double mid = 0.5 * (lo + hi);
            State m = step(left, mid);
            if ((m.u > 0) == (left.u > 0))
                lo = mid;
            else
                hi = mid;
        }
        State z = step(left, 0.5 * (lo + hi));
        return Zero{z.r, z.du};
    }

    int dim_;
    double p_;
    double c_;
};

}  // namespace refode
