#include "kummer/classical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>

#include "kummer/errors.hpp"
#include "kummer/quadrature.hpp"

namespace kummer {

ActionAngleState to_action_angle(std::span<const std::complex<double>> z, const SystemSpec& spec) {
    const int n = spec.modes();
    if (static_cast<int>(z.size()) != n) throw ValidationError("classical.modes", "z must have N+1 components");
    for (const auto& zk : z)
        if (std::abs(zk) == 0.0) throw ValidationError("classical.omega", "outside Omega");
    ActionAngleState s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            s.I[k] += spec.resonance.rho(k, j) * std::norm(z[j]);
            s.psi[k] += spec.resonance.kappa(j, k) * std::arg(z[j]);
        }
    return s;
}

std::vector<std::complex<double>> from_action_angle(const ActionAngleState& state, const SystemSpec& spec) {
    const int n = spec.modes();
    std::vector<std::complex<double>> z(n);
    for (int j = 0; j < n; ++j) {
        double mod2 = 0.0, phase = 0.0;
        for (int k = 0; k < n; ++k) {
            mod2 += spec.resonance.kappa(j, k) * state.I[k];
            phase += spec.resonance.rho(k, j) * state.psi[k];
        }
        if (mod2 < 0.0) throw ValidationError("classical.cone", "outside cone");
        z[j] = std::polar(std::sqrt(mod2), phase);
    }
    return z;
}

ConeBounds cone_bounds(const SystemSpec& spec, std::span<const double> c) {
    const int n = spec.modes();
    if (static_cast<int>(c.size()) != n - 1)
        throw ValidationError("spec.momentum", "momentum vector must have N components");
    ConeBounds cb;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 1; j < n; ++j) s += spec.resonance.kappa(i, j) * c[j - 1];
        const int li = spec.l[i];
        if (li > 0) cb.a = std::max(cb.a, -s / li);
        if (li < 0) cb.b = std::min(cb.b, s / -li);
        if (li == 0 && !(s > 0.0)) throw ValidationError("classical.empty", "empty reduced space");
    }
    if (!(cb.a < cb.b)) throw ValidationError("classical.empty", "empty reduced space");
    return cb;
}

ReducedSystem::ReducedSystem(const SystemSpec& spec, std::vector<double> c)
    : spec_(spec), c_(std::move(c)), cone_(cone_bounds(spec_, c_)) {
    g_ = classical_structural_expr(spec_);
    h_ = classical_free_expr(spec_);
    gt_ = classical_tilde_expr(spec_);
    for (int k = 0; k < spec_.modes(); ++k) {
        dg_.push_back(g_.diff(k));
        dh_.push_back(h_.diff(k));
    }
}

std::vector<double> ReducedSystem::actions(double i0) const {
    std::vector<double> I(spec_.modes());
    I[0] = i0;
    std::copy(c_.begin(), c_.end(), I.begin() + 1);
    return I;
}

double ReducedSystem::G0(double i0) const { return g_.eval(actions(i0), 0.0); }
double ReducedSystem::dG0(double i0, int k) const { return dg_.at(k).eval(actions(i0), 0.0); }
double ReducedSystem::H0(double i0) const { return h_.eval(actions(i0), 0.0); }
double ReducedSystem::dH0(double i0, int k) const { return dh_.at(k).eval(actions(i0), 0.0); }
double ReducedSystem::Gtilde(double i0) const { return gt_.eval(actions(i0), 0.0); }

double ReducedSystem::energy(double i0, double psi0) const {
    return H0(i0) + 2.0 * std::sqrt(G0(i0)) * std::cos(psi0);
}

std::array<double, 2> ReducedSystem::rhs(double i0, double psi0) const {
    const auto I = actions(i0);
    const double g = g_.eval(I, 0.0);
    if (!(g > 0.0)) return {std::nan(""), std::nan("")};
    const double sg = std::sqrt(g);
    return {2.0 * sg * std::sin(psi0), dh_[0].eval(I, 0.0) + dg_[0].eval(I, 0.0) * std::cos(psi0) / sg};
}

double ReducedSystem::angle_rate(int k, double i0, double psi0) const {
    const auto I = actions(i0);
    const double g = g_.eval(I, 0.0);
    if (!(g > 0.0)) return std::nan("");
    return dh_.at(k).eval(I, 0.0) + dg_.at(k).eval(I, 0.0) * std::cos(psi0) / std::sqrt(g);
}

Expr ReducedSystem::casimir_expr() const {
    std::vector<Expr> sub{Expr::arg(2)};
    for (double ck : c_) sub.emplace_back(ck);
    const Expr x = Expr::arg(0), y = Expr::arg(1);
    return Expr(-0.5) * (pow(x, 2) + pow(y, 2) - g_.substitute(sub));
}

Expr ReducedSystem::hamiltonian_xyz_expr() const {
    std::vector<Expr> sub{Expr::arg(2)};
    for (double ck : c_) sub.emplace_back(ck);
    return h_.substitute(sub) + Expr(2.0) * Expr::arg(0);
}

std::array<double, 2> reduced_rhs(const SystemSpec& spec, std::span<const double> c, double i0, double psi0) {
    ReducedSystem sys(spec, std::vector<double>(c.begin(), c.end()));
    if (!(i0 > sys.cone().a && i0 < sys.cone().b)) throw ValidationError("classical.cone", "outside cone");
    if (!(sys.G0(i0) > 0.0)) throw ValidationError("classical.boundary", "on/outside shape boundary");
    return sys.rhs(i0, psi0);
}

namespace {

std::vector<double> sample_times(double t_end, double dt) {
    if (!(t_end >= 0.0) || !(dt > 0.0)) throw ValidationError("classical.time", "need t_end >= 0 and dt > 0");
    std::vector<double> times;
    const long n = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    for (long k = 1; k <= n; ++k) times.push_back(std::min(k * dt, t_end));
    return times;
}

} // namespace

ReducedTrajectory integrate_reduced(const SystemSpec& spec, std::span<const double> c, double i0_init,
                                    double psi0_init, double t_end, double dt_hint, const OdeOptions& options) {
    ReducedSystem sys(spec, std::vector<double>(c.begin(), c.end()));
    if (!(i0_init > sys.cone().a && i0_init < sys.cone().b))
        throw ValidationError("classical.cone", "initial point outside cone");
    if (!(sys.G0(i0_init) > 0.0)) throw ValidationError("classical.boundary", "on/outside shape boundary");

    const auto times = sample_times(t_end, dt_hint);
    OdeRhs rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
        const auto r = sys.rhs(y[0], y[1]);
        dy[0] = r[0];
        dy[1] = r[1];
    };
    const auto res = integrate_dp45(rhs, {i0_init, psi0_init}, 0.0, times, options);

    ReducedTrajectory out;
    out.energy = sys.energy(i0_init, psi0_init);
    auto record = [&](double t, double i0, double psi0) {
        const double g = sys.G0(i0);
        const double sg = std::sqrt(std::max(g, 0.0));
        const double x = sg * std::cos(psi0), y = sg * std::sin(psi0);
        out.t.push_back(t);
        out.i0.push_back(i0);
        out.psi0.push_back(psi0);
        out.x.push_back(x);
        out.y.push_back(y);
        out.energy_drift.push_back(sys.H0(i0) + 2.0 * x - out.energy);
        out.casimir_drift.push_back(-0.5 * (x * x + y * y - g));
    };
    record(0.0, i0_init, psi0_init);
    for (std::size_t k = 0; k < res.t.size(); ++k) record(res.t[k], res.y[k][0], res.y[k][1]);
    out.completed = res.completed;
    if (!res.completed) {
        const double last = res.y.empty() ? i0_init : res.y.back()[0];
        const double g = sys.G0(last);
        out.status = g < 1e-6 * (1.0 + std::fabs(sys.H0(last)) + std::fabs(out.energy)) ? "shape boundary reached"
                                                                                      : res.status;
    }
    return out;
}

namespace {

// The energy level 4 G0 - (E - H0)^2 = (dI0/dt)^2 over the reduced cone.
struct Level {
    const ReducedSystem& sys;
    double E;
    double F(double I) const {
        const double d = E - sys.H0(I);
        return 4.0 * sys.G0(I) - d * d;
    }
    double dF(double I) const { return 4.0 * sys.dG0(I) + 2.0 * (E - sys.H0(I)) * sys.dH0(I); }
    double scale(double I) const {
        const double d = E - sys.H0(I);
        return 4.0 * std::fabs(sys.G0(I)) + d * d + 1e-300;
    }
};

// Nearest root of F from `start` in direction dir (+1 up, -1 down), within the cone.
std::optional<double> nearest_root(const Level& lv, double start, int dir, const ConeBounds& cone) {
    const double edge = dir > 0 ? cone.b : cone.a;
    std::function<double(double)> f = [&](double I) { return lv.F(I); };
    if (std::isfinite(edge)) {
        const int steps = 512;
        double prev = start;
        for (int k = 1; k <= steps; ++k) {
            const double I = k == steps ? edge : start + (edge - start) * k / steps;
            const double v = lv.F(I);
            if (v <= 0.0) {
                if (v == 0.0) return I;
                return find_root(f, std::min(prev, I), std::max(prev, I));
            }
            prev = I;
        }
        return std::nullopt;
    }
    double h = 1e-2 * std::max(1.0, std::fabs(start));
    double prev = start;
    while (h < 1e15) {
        const double I = start + dir * h;
        const double v = lv.F(I);
        if (v <= 0.0) {
            if (v == 0.0) return I;
            return find_root(f, std::min(prev, I), std::max(prev, I));
        }
        prev = I;
        h *= 2.0;
    }
    return std::nullopt;
}

class TimeMap {
public:
    TimeMap(const Level& lv, std::optional<double> r1, std::optional<double> r2) : lv_(lv), r1_(r1), r2_(r2) {}

    // Elapsed time between u <= v along the level set. Between two turning points each root owns the half of
    // the orbit nearest to it, so neither substitution comes close to the other root's singularity.
    double between(double u, double v) const {
        if (v <= u) return 0.0;
        if (r1_ && r2_) {
            const double c = 0.5 * (*r1_ + *r2_);
            return (u < c ? from_low(u, std::min(v, c)) : 0.0) + (v > c ? from_high(std::max(u, c), v) : 0.0);
        }
        if (r1_) return from_low(u, v);
        if (r2_) return from_high(u, v);
        return plain(u, v);
    }

private:
    // With I = r + dir s^2 the time element is 2 ds / sqrt(Q(s^2)), where Q(sigma) = (F(r + dir sigma) - F(r))/sigma
    // stays positive and smooth at the turning point.
    double piece(double r, int dir, double s_lo, double s_hi) const {
        auto f = [&](double s) {
            const double q = increment_rate(r, dir, s * s);
            return q > 0.0 ? 2.0 / std::sqrt(q) : 0.0;
        };
        return integrate_gk(f, s_lo, s_hi);
    }
    // Small steps average dF over [r, r + dir sigma] with 3-point Gauss-Legendre: the direct difference would
    // cancel to rounding noise near the root. Larger steps use the difference, whose noise is then ~eps/sigma.
    double increment_rate(double r, int dir, double sigma) const {
        if (sigma > 1e-2 * std::max(1.0, std::fabs(r))) return (lv_.F(r + dir * sigma) - lv_.F(r)) / sigma;
        static const double x = 0.5 * std::sqrt(0.6);
        const double a = lv_.dF(r + dir * sigma * (0.5 - x)), b = lv_.dF(r + dir * sigma * 0.5),
                     c = lv_.dF(r + dir * sigma * (0.5 + x));
        return dir * (5.0 * a + 8.0 * b + 5.0 * c) / 18.0;
    }
    double from_low(double u, double v) const {
        return piece(*r1_, +1, std::sqrt(std::max(u - *r1_, 0.0)), std::sqrt(std::max(v - *r1_, 0.0)));
    }
    double from_high(double u, double v) const {
        return piece(*r2_, -1, std::sqrt(std::max(*r2_ - v, 0.0)), std::sqrt(std::max(*r2_ - u, 0.0)));
    }
    double plain(double u, double v) const {
        auto f = [&](double I) { return 1.0 / std::sqrt(lv_.F(I)); };
        return integrate_gk(f, u, v);
    }

    const Level& lv_;
    std::optional<double> r1_, r2_;
};

// Solve between(lo, I) = tau for I, expanding the upper bracket when unbounded.
double invert_from_low(const TimeMap& tm, double lo, double tau, std::optional<double> hi) {
    if (tau <= 0.0) return lo;
    double upper;
    if (hi) {
        upper = *hi;
    } else {
        double h = 1e-2 * std::max(1.0, std::fabs(lo));
        while (tm.between(lo, lo + h) < tau) {
            h *= 2.0;
            if (h > 1e15) throw NumericalError("quadrature.escape", "trajectory leaves every bounded region");
        }
        upper = lo + h;
    }
    std::function<double(double)> f = [&](double I) { return tm.between(lo, I) - tau; };
    if (f(upper) <= 0.0) return upper;
    return find_root(f, lo, upper);
}

double invert_from_high(const TimeMap& tm, double hi, double tau, std::optional<double> lo) {
    if (tau <= 0.0) return hi;
    double lower;
    if (lo) {
        lower = *lo;
    } else {
        double h = 1e-2 * std::max(1.0, std::fabs(hi));
        while (tm.between(hi - h, hi) < tau) {
            h *= 2.0;
            if (h > 1e15) throw NumericalError("quadrature.escape", "trajectory leaves every bounded region");
        }
        lower = hi - h;
    }
    std::function<double(double)> f = [&](double I) { return tm.between(I, hi) - tau; };
    if (f(lower) <= 0.0) return lower;
    return find_root(f, lower, hi);
}

} // namespace

QuadratureTrajectory integrate_quadrature(const SystemSpec& spec, std::span<const double> c, double energy,
                                          double i0_init, int branch_sign, double t_end, double dt) {
    ReducedSystem sys(spec, std::vector<double>(c.begin(), c.end()));
    const ConeBounds& cone = sys.cone();
    if (!(i0_init >= cone.a && i0_init <= cone.b)) throw ValidationError("classical.cone", "initial point outside cone");
    Level lv{sys, energy};
    const double f0 = lv.F(i0_init);
    const double tol = 1e-12 * lv.scale(i0_init);
    int sigma = branch_sign >= 0 ? 1 : -1;

    std::optional<double> r1, r2;
    if (std::fabs(f0) <= tol) {
        const double slope = lv.dF(i0_init);
        const double slope_tol = 1e-8 * lv.scale(i0_init) / std::max(1.0, std::fabs(i0_init));
        if (std::fabs(slope) <= slope_tol)
            throw NumericalError("quadrature.separatrix", "degenerate turning point");
        if (slope > 0.0) {
            r1 = i0_init;
            r2 = nearest_root(lv, i0_init, +1, cone);
            sigma = 1;
        } else {
            r2 = i0_init;
            r1 = nearest_root(lv, i0_init, -1, cone);
            sigma = -1;
        }
    } else if (f0 < 0.0) {
        throw ValidationError("quadrature.empty", "empty level set");
    } else {
        r1 = nearest_root(lv, i0_init, -1, cone);
        r2 = nearest_root(lv, i0_init, +1, cone);
    }
    for (const auto& r : {r1, r2})
        if (r && std::fabs(lv.dF(*r)) <= 1e-10 * lv.scale(*r) / std::max(1.0, std::fabs(*r)))
            throw NumericalError("quadrature.separatrix", "degenerate turning point");

    TimeMap tm(lv, r1, r2);
    QuadratureTrajectory out;
    if (r1) out.turning_points.push_back(*r1);
    if (r2) out.turning_points.push_back(*r2);

    std::vector<double> times{0.0};
    for (double t : sample_times(t_end, dt)) times.push_back(t);

    if (r1 && r2) {
        const double half = tm.between(*r1, *r2);
        out.period = 2.0 * half;
        const double t_start = tm.between(*r1, i0_init);
        const double theta0 = sigma > 0 ? t_start : out.period - t_start;
        for (double t : times) {
            const double theta = std::fmod(theta0 + t, out.period);
            const double tau = theta <= half ? theta : out.period - theta;
            out.t.push_back(t);
            out.i0.push_back(invert_from_low(tm, *r1, tau, r2));
        }
    } else if (r1) {
        const double t_start = tm.between(*r1, i0_init);
        for (double t : times) {
            const double tau = sigma > 0 ? t_start + t : std::fabs(t_start - t);
            out.t.push_back(t);
            out.i0.push_back(invert_from_low(tm, *r1, tau, std::nullopt));
        }
    } else if (r2) {
        const double t_start = tm.between(i0_init, *r2);
        for (double t : times) {
            const double tau = sigma < 0 ? t_start + t : std::fabs(t_start - t);
            out.t.push_back(t);
            out.i0.push_back(invert_from_high(tm, *r2, tau, std::nullopt));
        }
    } else {
        for (double t : times) {
            out.t.push_back(t);
            out.i0.push_back(sigma > 0 ? invert_from_low(tm, i0_init, t, std::nullopt)
                                       : invert_from_high(tm, i0_init, t, std::nullopt));
        }
    }
    return out;
}

AngleSeries reconstruct_angles(const SystemSpec& spec, std::span<const double> c, const ReducedTrajectory& traj,
                               std::span<const double> psi_init, const OdeOptions& options) {
    ReducedSystem sys(spec, std::vector<double>(c.begin(), c.end()));
    const int n = spec.n_invariants();
    if (static_cast<int>(psi_init.size()) != n) throw ValidationError("classical.angles", "need N initial angles");
    if (traj.t.empty()) throw ValidationError("classical.angles", "empty trajectory");

    std::vector<double> y0{traj.i0[0], traj.psi0[0]};
    y0.insert(y0.end(), psi_init.begin(), psi_init.end());
    OdeRhs rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
        const auto r = sys.rhs(y[0], y[1]);
        dy[0] = r[0];
        dy[1] = r[1];
        for (int k = 1; k <= n; ++k) dy[1 + k] = sys.angle_rate(k, y[0], y[1]);
    };
    const std::vector<double> times(traj.t.begin() + 1, traj.t.end());
    const auto res = integrate_dp45(rhs, y0, traj.t[0], times, options);
    if (!res.completed) throw NumericalError("classical.angles", "angle integration failed: " + res.status);

    AngleSeries out;
    out.t = traj.t;
    out.psi.assign(n, {});
    out.psi_mod.assign(n, {});
    auto push = [&](const std::vector<double>& y) {
        for (int k = 0; k < n; ++k) {
            const double v = y[2 + k];
            out.psi[k].push_back(v);
            double m = std::fmod(v, 2.0 * std::numbers::pi);
            if (m < 0.0) m += 2.0 * std::numbers::pi;
            out.psi_mod[k].push_back(m);
        }
    };
    push(y0);
    for (const auto& y : res.y) push(y);
    return out;
}

std::vector<KummerPoint> kummer_shape_sample(const SystemSpec& spec, std::span<const double> c, int n_i0,
                                             int n_angle, double i0_max) {
    if (n_i0 < 1 || n_angle < 1) throw ValidationError("classical.grid", "grid sizes must be positive");
    ReducedSystem sys(spec, std::vector<double>(c.begin(), c.end()));
    double a = sys.cone().a;
    double b = sys.cone().b;
    if (!std::isfinite(a)) throw ValidationError("classical.grid", "cone unbounded below");
    if (!std::isfinite(b)) b = i0_max > a ? i0_max : a + 10.0 * std::max(1.0, std::fabs(a));
    std::vector<KummerPoint> pts;
    pts.reserve(static_cast<std::size_t>(n_i0) * n_angle);
    for (int i = 0; i < n_i0; ++i) {
        const double i0 = a + (b - a) * (i + 0.5) / n_i0;
        const double sg = std::sqrt(std::max(sys.G0(i0), 0.0));
        for (int j = 0; j < n_angle; ++j) {
            const double psi = 2.0 * std::numbers::pi * (j + 1) / n_angle;
            pts.push_back({sg * std::cos(psi), sg * std::sin(psi), i0});
        }
    }
    return pts;
}

double nambu_bracket(const Expr& C, const Expr& f, const Expr& g, const std::array<double, 3>& point) {
    const std::vector<double> p(point.begin(), point.end());
    double m[3][3];
    const Expr* rows[3] = {&C, &f, &g};
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) m[r][k] = rows[r]->diff(k).eval(p, 0.0);
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

XYOverlay xyI_trajectory(const SystemSpec& spec, std::span<const double> c, double energy,
                         const ReducedTrajectory& traj) {
    ReducedSystem sys(spec, std::vector<double>(c.begin(), c.end()));
    XYOverlay out;
    out.t = traj.t;
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        const double i0 = traj.i0[k], psi = traj.psi0[k];
        const double g = sys.G0(i0);
        const double sg = std::sqrt(std::max(g, 0.0));
        const double xa = sg * std::cos(psi), ya = sg * std::sin(psi);
        const double xe = 0.5 * (energy - sys.H0(i0));
        const double yr = 0.5 * sys.rhs(i0, psi)[0];
        out.x_angle.push_back(xa);
        out.y_angle.push_back(ya);
        out.x_energy.push_back(xe);
        out.y_rate.push_back(yr);
        out.max_dx = std::max(out.max_dx, std::fabs(xa - xe));
        out.max_dy = std::max(out.max_dy, std::fabs(ya - yr));
        out.max_casimir = std::max(out.max_casimir, std::fabs(-0.5 * (xe * xe + yr * yr - g)));
        out.max_energy = std::max(out.max_energy, std::fabs(sys.H0(i0) + 2.0 * xa - energy));
    }
    return out;
}

} // namespace kummer
