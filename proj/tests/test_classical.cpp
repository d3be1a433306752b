// Classical reduction checked against closed forms: the Krawtchouk flow is linear in (x, y, I0) and is
// solved exactly with a matrix exponential; the Laguerre and Krawtchouk shape functions are quadratics.
#include <cmath>
#include <random>

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "kummer/classical.hpp"
#include "kummer/errors.hpp"
#include "kummer/presets.hpp"

using namespace kummer;

namespace {

constexpr double kPi = 3.14159265358979323846;

SystemSpec krawtchouk(double p) {
    PresetParams params;
    params.p = p;
    return preset_spec(PresetKind::Krawtchouk, params);
}

SystemSpec laguerre() { return preset_spec(PresetKind::Laguerre, {}); }

}  // namespace

TEST_CASE("action-angle coordinates invert each other") {
    const SystemSpec s = preset_spec(PresetKind::ThreeWave, {});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 20; ++k) {
        std::vector<std::complex<double>> z{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
        const ActionAngleState st = to_action_angle(z, s);
        // I_0 with the default resonance rows is sum l_j |z_j|^2 / (l.l).
        CHECK(st.I[0] == doctest::Approx((std::norm(z[0]) - std::norm(z[1]) - std::norm(z[2])) / 3.0));
        const auto back = from_action_angle(st, s);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(back[j] - z[j]) < 1e-12);
    }
    const std::vector<std::complex<double>> zero{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5}};
    CHECK_THROWS_AS(to_action_angle(zero, s), ValidationError);
}

TEST_CASE("cone bounds and shape functions of the worked examples") {
    const double c1 = 1.25, p = 0.3, pq = p * (1.0 - p);
    const ReducedSystem k(krawtchouk(p), {c1});
    CHECK(k.cone().a == doctest::Approx(-c1));
    CHECK(k.cone().b == doctest::Approx(c1));
    const ReducedSystem l(laguerre(), {c1});
    CHECK(l.cone().a == doctest::Approx(c1));
    CHECK_FALSE(l.cone().bounded());
    for (double i0 : {-1.0, -0.2, 0.4, 1.1}) {
        CHECK(k.G0(i0) == doctest::Approx(pq * (c1 * c1 - i0 * i0)));
        CHECK(k.dG0(i0) == doctest::Approx(-2.0 * pq * i0));
        CHECK(k.dG0(i0, 1) == doctest::Approx(2.0 * pq * c1));
        CHECK(k.H0(i0) == doctest::Approx((1.0 - 2.0 * p) * i0 + c1));
        CHECK(k.Gtilde(i0) == doctest::Approx(pq * (c1 + i0) / (c1 - i0)));
    }
    for (double i0 : {1.3, 2.0, 7.5}) {
        CHECK(l.G0(i0) == doctest::Approx(i0 * i0 - c1 * c1));
        CHECK(l.H0(i0) == doctest::Approx(2.0 * i0));
        CHECK(l.energy(i0, 0.4) == doctest::Approx(2.0 * i0 + 2.0 * std::sqrt(i0 * i0 - c1 * c1) * std::cos(0.4)));
    }
    const std::vector<double> c{c1};
    CHECK_THROWS_AS(reduced_rhs(laguerre(), c, 0.5, 0.0), ValidationError);
}

TEST_CASE("Nambu brackets reproduce the shape algebra") {
    // {x, y} = dG0/dI0 / 2, {I0, x} = -y, {I0, y} = x, with the Casimir as the first slot.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const SystemSpec& s : {laguerre(), krawtchouk(0.3)}) {
        const ReducedSystem rs(s, {1.0});
        const Expr C = rs.casimir_expr();
        const Expr X = Expr::arg(0), Y = Expr::arg(1), I0 = Expr::arg(2);
        const double a = rs.cone().a, b = rs.cone().bounded() ? rs.cone().b : a + 5.0;
        for (int k = 0; k < 10; ++k) {
            const double i0 = a + (b - a) * (0.05 + 0.9 * u(rng)), psi = 2.0 * kPi * u(rng);
            const double r = std::sqrt(rs.G0(i0));
            const std::array<double, 3> pt{r * std::cos(psi), r * std::sin(psi), i0};
            CHECK(C.eval(std::vector<double>{pt[0], pt[1], pt[2]}, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(nambu_bracket(C, X, Y, pt) == doctest::Approx(0.5 * rs.dG0(i0)).epsilon(1e-12));
            CHECK(nambu_bracket(C, I0, X, pt) == doctest::Approx(-pt[1]).epsilon(1e-12));
            CHECK(nambu_bracket(C, I0, Y, pt) == doctest::Approx(pt[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("Krawtchouk trajectory matches the exact solution of its linear system") {
    // x' = -w y, y' = w x - 2 pq I0, I0' = 2 y with w = 1 - 2p; the solution is exp(M t) u0.
    const double p = 0.3, pq = p * (1.0 - p), w = 1.0 - 2.0 * p, c1 = 1.0;
    const SystemSpec s = krawtchouk(p);
    const std::vector<double> c{c1};
    const double i0 = 0.35, psi0 = 1.1;
    const ReducedTrajectory tr = integrate_reduced(s, c, i0, psi0, 10.0, 0.25);
    REQUIRE(tr.completed);
    Eigen::Matrix3d M;
    M << 0, -w, 0, w, 0, -2.0 * pq, 0, 2, 0;
    const double r = std::sqrt(pq * (c1 * c1 - i0 * i0));
    const Eigen::Vector3d u0(r * std::cos(psi0), r * std::sin(psi0), i0);
    double worst = 0.0;
    for (std::size_t j = 0; j < tr.t.size(); ++j) {
        const Eigen::Vector3d ex = (M * tr.t[j]).exp() * u0;
        worst = std::max({worst, std::fabs(tr.x[j] - ex(0)), std::fabs(tr.y[j] - ex(1)), std::fabs(tr.i0[j] - ex(2))});
    }
    CHECK(worst < 1e-8);
    // The characteristic frequency is sqrt(w^2 + 4 pq) = 1 for every p: period 2 pi.
    const QuadratureTrajectory q = integrate_quadrature(s, c, tr.energy, i0, 1, 1.0, 0.5);
    CHECK(std::fabs(q.period - 2.0 * kPi) < 1e-11);
}

TEST_CASE("quadrature and ODE give the same I0(t)") {
    const SystemSpec s = laguerre();
    const std::vector<double> c{1.0};
    const double i0 = 1.6, psi0 = 0.9;  // sin(psi0) > 0: I0 increasing at the start
    const ReducedTrajectory tr = integrate_reduced(s, c, i0, psi0, 3.0, 0.1);
    REQUIRE(tr.completed);
    const QuadratureTrajectory q = integrate_quadrature(s, c, tr.energy, i0, 1, 3.0, 0.1);
    REQUIRE(q.t.size() == tr.t.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < q.t.size(); ++j) worst = std::max(worst, std::fabs(q.i0[j] - tr.i0[j]) / (1.0 + tr.i0[j]));
    CHECK(worst < 1e-6);
}

TEST_CASE("conservation along reduced trajectories") {
    for (const SystemSpec& s : {laguerre(), krawtchouk(0.45)}) {
        const std::vector<double> c{0.8};
        const ReducedSystem rs(s, c);
        const double i0 = rs.cone().bounded() ? 0.1 : 1.5;
        const ReducedTrajectory tr = integrate_reduced(s, c, i0, 2.0, 10.0, 0.1);
        REQUIRE(tr.completed);
        for (std::size_t j = 0; j < tr.t.size(); ++j) {
            CHECK(std::fabs(tr.energy_drift[j]) < 1e-8 * (1.0 + std::fabs(tr.energy)));
            CHECK(std::fabs(tr.casimir_drift[j]) < 1e-8 * (1.0 + std::fabs(tr.energy)));
        }
        const XYOverlay ov = xyI_trajectory(s, c, tr.energy, tr);
        // x and y rebuilt from E - H0 and dI0/dt carry rounding relative to G0, which grows along Laguerre orbits.
        double g_max = 0.0;
        for (double i : tr.i0) g_max = std::max(g_max, rs.G0(i));
        CHECK(ov.max_casimir < 1e-8 * (1.0 + g_max));
        CHECK(ov.max_energy < 1e-8);
        CHECK(ov.max_dx < 1e-7);
        CHECK(ov.max_dy < 1e-7);
    }
}

TEST_CASE("angle reconstruction against an independent three-state integration") {
    // Krawtchouk: dpsi1/dt = 1 + 2 pq I1 cos(psi0)/sqrt(G0), integrated together with (I0, psi0) from
    // hand-written right-hand sides.
    const double p = 0.3, pq = p * (1.0 - p), w = 1.0 - 2.0 * p, c1 = 1.0;
    const SystemSpec s = krawtchouk(p);
    const std::vector<double> c{c1};
    const ReducedTrajectory tr = integrate_reduced(s, c, 0.2, 0.7, 5.0, 0.5);
    const std::vector<double> psi_init{0.3};
    const AngleSeries ang = reconstruct_angles(s, c, tr, psi_init);
    const OdeRhs rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
        const double g = pq * (c1 * c1 - y[0] * y[0]), sg = std::sqrt(g);
        dy[0] = 2.0 * sg * std::sin(y[1]);
        dy[1] = w - 2.0 * pq * y[0] * std::cos(y[1]) / sg;
        dy[2] = 1.0 + 2.0 * pq * c1 * std::cos(y[1]) / sg;
    };
    std::vector<double> times(tr.t.begin() + 1, tr.t.end());
    OdeOptions tight;
    tight.abs_tol = tight.rel_tol = 1e-12;
    const OdeResult ref = integrate_dp45(rhs, {0.2, 0.7, 0.3}, 0.0, times, tight);
    REQUIRE(ref.completed);
    REQUIRE(ang.t.size() == tr.t.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        CHECK(std::fabs(ang.psi[0][j + 1] - ref.y[j][2]) < 1e-7);
        CHECK(ang.psi_mod[0][j + 1] >= 0.0);
        CHECK(ang.psi_mod[0][j + 1] < 2.0 * kPi);
    }
}

TEST_CASE("shape samples lie on the Casimir surface") {
    for (const SystemSpec& s : {laguerre(), krawtchouk(0.5), preset_spec(PresetKind::ThreeWave, {})}) {
        const std::vector<double> c(s.n_invariants(), 1.0);
        const ReducedSystem rs(s, c);
        const auto pts = kummer_shape_sample(s, c, 16, 16, 6.0);
        CHECK(pts.size() == 256);
        for (const auto& pt : pts) {
            CHECK(pt.i0 > rs.cone().a);
            CHECK(std::fabs(pt.x * pt.x + pt.y * pt.y - rs.G0(pt.i0)) < 1e-12 * (1.0 + rs.G0(pt.i0)));
        }
    }
}
