#include "kummer/ode.hpp"

#include <algorithm>
#include <cmath>

#include "kummer/errors.hpp"

namespace kummer {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

OdeResult integrate_dp45(const OdeRhs& rhs, const std::vector<double>& y0, double t0,
                         const std::vector<double>& times, const OdeOptions& options) {
    const std::size_t n = y0.size();
    OdeResult out;
    std::vector<double> y(y0), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
    double t = t0;
    rhs(t, y, k1);
    if (!all_finite(k1)) {
        out.completed = false;
        out.status = "non-finite derivative at the initial point";
        return out;
    }

    double h = options.h_init;
    if (h <= 0.0) {
        double scale = 0.0, dnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = options.abs_tol + options.rel_tol * std::fabs(y[i]);
            scale += (y[i] / sc) * (y[i] / sc);
            dnorm += (k1[i] / sc) * (k1[i] / sc);
        }
        scale = std::sqrt(scale / n);
        dnorm = std::sqrt(dnorm / n);
        h = (scale < 1e-5 || dnorm < 1e-5) ? 1e-6 : 0.01 * scale / dnorm;
    }
    if (options.h_max > 0.0) h = std::min(h, options.h_max);

    for (double target : times) {
        if (target < t) throw ValidationError("ode.times", "output times must be ascending and not before t0");
        while (t < target) {
            if (out.accepted_steps + out.rejected_steps >= options.max_steps) {
                out.completed = false;
                out.status = "step limit reached";
                return out;
            }
            bool last = false;
            double step = h;
            if (t + step >= target || target - (t + step) < 1e-12 * std::fabs(target)) {
                step = target - t;
                last = true;
            }
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * a21 * k1[i];
            rhs(t + c2 * step, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * step, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * step, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(t + c5 * step, tmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(t + step, tmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(t + step, ynew, k7);

            double err = 0.0;
            bool finite = all_finite(ynew) && all_finite(k7);
            if (finite) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double ei =
                        step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                    const double sc =
                        options.abs_tol + options.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
                    err += (ei / sc) * (ei / sc);
                }
                err = std::sqrt(err / n);
                finite = std::isfinite(err);
            }
            if (!finite) {
                ++out.rejected_steps;
                h = step * 0.25;
            } else if (err <= 1.0) {
                ++out.accepted_steps;
                t = last ? target : t + step;
                y.swap(ynew);
                k1.swap(k7);
                const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                // A step shortened to hit an output time does not shrink the next proposal.
                const double proposal = step * factor;
                h = last ? std::max(h, proposal) : proposal;
            } else {
                ++out.rejected_steps;
                h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            }
            if (options.h_max > 0.0) h = std::min(h, options.h_max);
            if (h < 1e-14 * std::max(1.0, std::fabs(t))) {
                out.completed = false;
                out.status = "step size underflow";
                return out;
            }
        }
        out.t.push_back(t);
        out.y.push_back(y);
    }
    return out;
}

} // namespace kummer
