// Core numerics checked against independent references: Eigen's dense solvers, Boost.Math special
// functions and integrals with known values.
#include <cmath>
#include <random>

#include <doctest.h>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/math/special_functions/laguerre.hpp>

#include "kummer/errors.hpp"
#include "kummer/expr.hpp"
#include "kummer/ode.hpp"
#include "kummer/quadrature.hpp"
#include "kummer/special.hpp"
#include "kummer/system.hpp"
#include "kummer/tridiagonal.hpp"

using namespace kummer;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rel(double a, double b) { return std::fabs(a - b) / std::max(1e-300, std::fabs(b)); }

}  // namespace

TEST_CASE("phi functions match their elementary forms") {
    for (double u : {-30.0, -2.5, -1e-3, 1e-9, 0.3, 4.0, 25.0}) {
        CHECK(rel(phi_function(0, u), std::exp(u)) < 1e-14);
        CHECK(rel(phi_function(1, u), std::expm1(u) / u) < 1e-14);
        CHECK(rel(phi_function(2, u), (std::expm1(u) - u) / (u * u)) < (std::fabs(u) < 1e-2 ? 1e-6 : 1e-12));
    }
    CHECK(phi_function(1, 0.0) == 1.0);
    CHECK(phi_function(2, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("expression derivatives agree with central differences") {
    const Expr x = Expr::arg(0), y = Expr::arg(1);
    const Expr f = sqrt(x * y + 2.0) * exp(-x / 3.0) + log(1.0 + y * y) + pow(x - y, 3) + exprel(0.7 * x) -
                   Expr::hbar() * x;
    const std::vector<double> pt{0.8, -0.4};
    for (int i = 0; i < 2; ++i) {
        const double h = 1e-5;
        std::vector<double> lo = pt, hi = pt;
        lo[i] -= h;
        hi[i] += h;
        const double fd = (f.eval(hi, 0.25) - f.eval(lo, 0.25)) / (2.0 * h);
        CHECK(rel(f.diff(i).eval(pt, 0.25), fd) < 1e-8);
    }
    CHECK(f.uses_hbar());
    CHECK(f.max_arg() == 1);
    CHECK(Expr(3.0).is_constant());
}

TEST_CASE("expressions round-trip through JSON and substitution") {
    const Expr x = Expr::arg(0), y = Expr::arg(1);
    const Expr f = (x + Expr::hbar()) * (y - 2.0) / sqrt(1.0 + x * x) + phi(2, y);
    const Expr g = Expr::from_json(f.to_json());
    const std::vector<double> pt{1.3, 0.2};
    CHECK(g.eval(pt, 0.5) == f.eval(pt, 0.5));
    const Expr swapped = f.substitute({y, x});
    CHECK(swapped.eval(std::vector<double>{0.2, 1.3}, 0.5) == doctest::Approx(f.eval(pt, 0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(Expr::from_json(nlohmann::json{{"op", "nope"}}), ValidationError);
}

TEST_CASE("implicit QL agrees with Eigen's dense symmetric solver") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int n : {1, 2, 5, 40, 150}) {
        std::vector<double> d(n), e(std::max(0, n - 1));
        for (auto& v : d) v = gauss(rng);
        for (auto& v : e) v = gauss(rng);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) T(i, i) = d[i];
        for (int i = 0; i + 1 < n; ++i) T(i, i + 1) = T(i + 1, i) = e[i];
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(T);
        const TridiagonalEigen mine = tridiagonal_eigen(d, e);
        for (int i = 0; i < n; ++i) CHECK(std::fabs(mine.values[i] - ref.eigenvalues()(i)) < 1e-12 * (1.0 + T.norm()));
        const Eigen::MatrixXd R = T * mine.vectors - mine.vectors * Eigen::VectorXd::Map(mine.values.data(), n).asDiagonal();
        CHECK(R.cwiseAbs().maxCoeff() < 1e-12 * (1.0 + T.norm()));
        const Eigen::MatrixXd O = mine.vectors.transpose() * mine.vectors - Eigen::MatrixXd::Identity(n, n);
        CHECK(O.cwiseAbs().maxCoeff() < 1e-12);
        const TridiagonalEigen first = tridiagonal_eigen(d, e, EigenvectorMode::FirstComponents);
        for (int i = 0; i < n; ++i) CHECK(std::fabs(std::fabs(first.vectors(0, i)) - std::fabs(mine.vectors(0, i))) < 1e-12);
    }
}

TEST_CASE("Gauss-Laguerre nodes are Laguerre zeros and integrate moments exactly") {
    for (double alpha : {0.0, 2.0, 5.0}) {
        const auto rule = gauss_laguerre(30, alpha);
        REQUIRE(rule->nodes.size() == 30);
        for (double x : rule->nodes) {
            // Relative to the size of the polynomial near x, measured through its derivative scale.
            const double p = boost::math::laguerre(30, static_cast<unsigned>(alpha), x);
            const double dp = boost::math::laguerre(29, static_cast<unsigned>(alpha) + 1, x);
            CHECK(std::fabs(p / dp) < 1e-11 * (1.0 + x));
        }
        for (int k = 0; k <= 20; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < rule->nodes.size(); ++j) s += rule->weights[j] * std::pow(rule->nodes[j], k);
            CHECK(rel(s, boost::math::tgamma(alpha + k + 1.0)) < 1e-12);
        }
    }
}

TEST_CASE("adaptive Gauss-Kronrod and bracketed roots") {
    double err = 0.0;
    CHECK(rel(integrate_gk([](double x) { return std::exp(-x * x); }, 0.0, INFINITY, 1e-13, &err),
              0.5 * std::sqrt(kPi)) < 1e-13);
    CHECK(err < 1e-10);
    // Endpoint singularity: the depth cap limits accuracy, and the error estimate must say so honestly.
    const double v = integrate_gk([](double x) { return std::log(x) * std::log(x); }, 0.0, 1.0, 1e-13, &err);
    CHECK(std::fabs(v - 2.0) < 1e-5);
    CHECK(std::fabs(v - 2.0) <= err);
    const double r = find_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0);
    CHECK(std::fabs(std::cos(r) - r) < 1e-15);
}

TEST_CASE("hypergeometric series against Boost and closed forms") {
    for (double x : {-1.5, 0.3, 7.0}) {
        const double ref = boost::math::hypergeometric_1F1(0.5, 2.5, x);
        CHECK(rel(hypergeometric_pfq({0.5}, {2.5}, x).real(), ref) < 1e-13);
    }
    // Alternating series lose digits to cancellation; the loss is bounded by the sum of |terms|.
    const double scale = boost::math::hypergeometric_1F1(0.5, 2.5, 20.0);
    CHECK(std::fabs(hypergeometric_pfq({0.5}, {2.5}, -20.0).real() - boost::math::hypergeometric_1F1(0.5, 2.5, -20.0)) <
          10.0 * std::numeric_limits<double>::epsilon() * scale);
    // 0F1(; v+1; -x^2/4) = Gamma(v+1) (2/x)^v J_v(x).
    for (double x : {0.5, 3.0, 9.0}) {
        const double ref = boost::math::tgamma(3.0) * std::pow(2.0 / x, 2.0) * boost::math::cyl_bessel_j(2, x);
        CHECK(rel(hypergeometric_pfq({}, {3.0}, -x * x / 4.0).real(), ref) < 1e-12);
    }
    // Chu-Vandermonde: 2F1(-n, b; c; 1) = (c-b)_n/(c)_n, summed exactly since it terminates.
    const double b = 1.5, c = 4.25;
    const int n = 12;
    const double ref = boost::math::tgamma_ratio(c - b + n, c - b) / boost::math::tgamma_ratio(c + n, c);
    CHECK(rel(hypergeometric_pfq({-double(n), b}, {c}, 1.0).real(), ref) < 1e-13);
    // e^{w} for complex w through 0F0.
    const std::complex<double> w(1.2, -3.4);
    CHECK(std::abs(hypergeometric_pfq({}, {}, w) - std::exp(w)) < 1e-13 * std::abs(std::exp(w)));
    CHECK_THROWS_AS(hypergeometric_pfq({1.0, 1.0}, {}, 2.0), NumericalError);
    CHECK_THROWS_AS(hypergeometric_pfq({1.0}, {-2.0}, 0.5), ValidationError);
}

TEST_CASE("Dormand-Prince integration against exact solutions") {
    // Harmonic oscillator: y = (cos t, -sin t).
    const OdeRhs osc = [](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    const std::vector<double> times{0.5, 1.0, 3.25, 10.0};
    const OdeResult r = integrate_dp45(osc, {1.0, 0.0}, 0.0, times);
    REQUIRE(r.completed);
    REQUIRE(r.t.size() == times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(r.t[k] == times[k]);
        CHECK(std::fabs(r.y[k][0] - std::cos(times[k])) < 1e-8);
        CHECK(std::fabs(r.y[k][1] + std::sin(times[k])) < 1e-8);
    }
    // y' = y^2, y(0) = 1 blows up at t = 1: the run must stop and say so.
    const OdeRhs blow = [](double, const std::vector<double>& y, std::vector<double>& dy) { dy[0] = y[0] * y[0]; };
    const OdeResult b = integrate_dp45(blow, {1.0}, 0.0, {0.5, 2.0});
    CHECK_FALSE(b.completed);
    REQUIRE(b.t.size() == 1);
    CHECK(rel(b.y[0][0], 2.0) < 1e-8);
}

TEST_CASE("resonance matrices and exponent validation") {
    for (const std::vector<int>& l : {std::vector<int>{1, 1}, {1, -1}, {2, 1, -3}, {1}}) {
        const ResonanceMatrix m = default_resonance_matrix(l);
        const int n = static_cast<int>(l.size());
        Eigen::VectorXd lv(n);
        for (int i = 0; i < n; ++i) lv(i) = l[i];
        Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
        e0(0) = 1.0;
        CHECK((m.rho * lv - e0).norm() < 1e-14);
        CHECK((m.rho * m.kappa - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-13);
        CHECK((m.kappa.col(0) - lv).norm() < 1e-13);
    }
    CHECK_THROWS_AS(validate_exponents({0, 0}), ValidationError);
    CHECK_THROWS_AS(validate_exponents({-1, -2}), ValidationError);
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 0, 0, 1;  // row 1 . l = 1 for l = (1, 1), so row 1 is not orthogonal to l
    CHECK_THROWS_AS(make_resonance(bad, {1, 1}), ValidationError);
}

TEST_CASE("ladder polynomials and structural functions") {
    CHECK(eval_P(0, 3.0, 0.5) == 1.0);
    CHECK(eval_P(3, 2.0, 0.5) == doctest::Approx(2.5 * 3.0 * 3.5));
    CHECK(eval_P(-3, 2.0, 0.5) == doctest::Approx(2.0 * 1.5 * 1.0));

    Eigen::MatrixXd rho(2, 2);
    rho << 0.5, 0.5, -0.5, 0.5;
    const Expr x0 = Expr::arg(0), x1 = Expr::arg(1);
    const SystemSpec s = make_spec({1, 1}, rho, Expr(1.0), x0 + x1 + Expr::hbar(), 0.5);
    const std::vector<double> c{1.5};
    // Occupations x = kappa (a0, c) = (a0 - c1, a0 + c1).
    const double a0 = 2.0;
    const auto x = occupations(s, a0, c);
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(3.5));
    CHECK(structural_fn_quantum(s, a0, c) == doctest::Approx((0.5 + 0.5) * (3.5 + 0.5)));
    CHECK(structural_fn_classical(s, a0, c) == doctest::Approx(0.5 * 3.5));
    CHECK(free_energy(s, a0, c, true) == doctest::Approx(4.5));
    CHECK(free_energy(s, a0, c, false) == doctest::Approx(4.0));

    const SystemSpec back = spec_from_json(spec_to_json(s));
    CHECK(back.l == s.l);
    CHECK(back.hbar == s.hbar);
    CHECK((back.resonance.rho - s.resonance.rho).norm() == 0.0);
    CHECK(structural_fn_quantum(back, a0, c) == structural_fn_quantum(s, a0, c));
}
