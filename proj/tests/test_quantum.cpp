// Quantum reduction checked against closed-form ladder weights, dense Eigen solvers, matrix exponentials,
// the zeros of Laguerre polynomials and the exact Krawtchouk spectrum.
#include <cmath>
#include <cstdlib>

#include <doctest.h>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/laguerre.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "kummer/errors.hpp"
#include "kummer/presets.hpp"
#include "kummer/quantum.hpp"

using namespace kummer;

namespace {

Preset preset(PresetKind kind, double hbar = 1.0, std::vector<int> vacuum = {}, int truncation = 0, double p = 0.5) {
    PresetParams params;
    params.hbar = hbar;
    params.p = p;
    params.vacuum = std::move(vacuum);
    params.truncation = truncation;
    return build_preset(kind, params);
}

Eigen::MatrixXd commutator_defect(const ReducedOperators& ops) {
    return ops.A * ops.Astar - ops.Astar * ops.A;
}

}  // namespace

TEST_CASE("ladder weights follow the closed forms") {
    for (double h : {1.0, 0.3}) {
        const double p = 0.3, pq = p * (1.0 - p);
        const Preset k = preset(PresetKind::Krawtchouk, h, {0, 10}, 0, p);
        REQUIRE(k.sector.finite);
        CHECK(k.sector.L == 10);
        CHECK(k.sector.dim == 11);
        for (int n = 0; n < 10; ++n) CHECK(k.sector.g_seq[n] == doctest::Approx(pq * h * h * (n + 1) * (10 - n)).epsilon(1e-14));

        const Preset l = preset(PresetKind::Laguerre, h, {0, 2}, 60);
        CHECK_FALSE(l.sector.finite);
        CHECK(l.sector.dim == 60);
        for (int n = 0; n < 59; ++n) CHECK(l.sector.g_seq[n] == doctest::Approx(h * h * (n + 1) * (n + 3)).epsilon(1e-14));

        PresetParams qp;
        qp.hbar = h;
        qp.truncation = 40;
        const Preset q = build_preset(PresetKind::QWeyl, qp);
        const double Q = std::pow(qp.q, h / qp.alpha);
        for (int n = 0; n < 39; ++n)
            CHECK(q.sector.g_seq[n] == doctest::Approx(h * (1.0 - std::pow(Q, n + 1)) / (1.0 - Q)).epsilon(1e-13));
    }
}

TEST_CASE("commutators of the dense operators") {
    const double h = 0.7;
    // Laguerre: [A, A*] = 2 hbar A0 + hbar^2 away from the truncation edge.
    const Preset l = preset(PresetKind::Laguerre, h, {0, 2}, 50);
    const ReducedOperators lo = reduced_operators(l.sector);
    const Eigen::MatrixXd dl = commutator_defect(lo) - 2.0 * h * lo.A0.dense() -
                               h * h * Eigen::MatrixXd::Identity(l.sector.dim, l.sector.dim);
    CHECK(dl.topLeftCorner(49, 49).norm() < 1e-11);
    // Krawtchouk: [A, A*] = -2 hbar p(1-p) A0 on the whole finite sector.
    const double p = 0.3;
    const Preset k = preset(PresetKind::Krawtchouk, h, {0, 10}, 0, p);
    const ReducedOperators ko = reduced_operators(k.sector);
    CHECK((commutator_defect(ko) + 2.0 * h * p * (1.0 - p) * ko.A0.dense()).norm() < 1e-12);
    // A0 and A: [A0, A] = -hbar A.
    const Eigen::MatrixXd a0 = ko.A0.dense();
    CHECK((a0 * ko.A - ko.A * a0 + h * ko.A).norm() < 1e-12);
}

TEST_CASE("relation reports pass for every preset") {
    for (PresetKind kind : {PresetKind::Laguerre, PresetKind::Krawtchouk, PresetKind::QWeyl, PresetKind::ThreeWave}) {
        const Preset p = preset(kind, 1.0, {}, 120);
        const RelationReport r = verify_relations(p.sector, p.spec);
        CHECK(r.pass);
        CHECK(r.items.size() == 4);
        for (const auto& it : r.items) CHECK(it.relative < 1e-12);
    }
}

TEST_CASE("Hamiltonian spectra against Eigen and exact values") {
    // Krawtchouk: a spin-L/2 rotation, spectrum hbar {0, 1, ..., L} for every p.
    for (double p : {0.2, 0.5}) {
        const Preset k = preset(PresetKind::Krawtchouk, 0.4, {0, 10}, 0, p);
        const TridiagonalOperator H = reduced_hamiltonian(k.sector, k.spec);
        const Spectrum& sp = H.spectrum();
        for (int j = 0; j <= 10; ++j) CHECK(std::fabs(sp.values[j] - 0.4 * j) < 1e-12);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(H.dense());
        for (int j = 0; j <= 10; ++j) CHECK(std::fabs(sp.values[j] - ref.eigenvalues()(j)) < 1e-12);
        CHECK(sp.max_residual < 1e-12);
        CHECK(sp.orthogonality < 1e-12);
    }
    // Laguerre: hbar times the zeros of L_M^{(v1)}; a Newton step L/L' must vanish at each eigenvalue.
    for (double h : {1.0, 0.5}) {
        const int M = 60;
        const Preset l = preset(PresetKind::Laguerre, h, {0, 2}, M);
        const TridiagonalOperator H = reduced_hamiltonian(l.sector, l.spec);
        const Spectrum& sp = H.spectrum();
        for (double lam : sp.values) {
            const double x = lam / h;
            const double f = boost::math::laguerre(M, 2u, x), df = -boost::math::laguerre(M - 1, 3u, x);
            CHECK(std::fabs(f / df) < 1e-10 * (1.0 + x));
        }
    }
}

TEST_CASE("Heisenberg evolution against a dense matrix exponential") {
    const double h = 0.8, t = 0.9;
    const Preset k = preset(PresetKind::Krawtchouk, h, {0, 8}, 0, 0.35);
    const HeisenbergEvolver ev(k.sector, k.spec);
    const Eigen::MatrixXcd H = ev.hamiltonian().dense().cast<std::complex<double>>();
    const std::complex<double> I(0.0, 1.0);
    const Eigen::MatrixXcd U = (-I * t / h * H).exp();
    const ReducedOperators ops = reduced_operators(k.sector);
    for (const Eigen::MatrixXcd& F : {Eigen::MatrixXcd(ops.A0.dense().cast<std::complex<double>>()),
                                     Eigen::MatrixXcd(ops.X.dense().cast<std::complex<double>>()), ops.Y}) {
        const Eigen::MatrixXcd ref = U * F * U.adjoint();
        CHECK((ev.evolve(F, t) - ref).norm() < 1e-11 * (1.0 + F.norm()));
    }
}

TEST_CASE("Heisenberg and shape residuals on a finite sector") {
    const Preset k = preset(PresetKind::Krawtchouk, 1.0, {0, 10}, 0, 0.3);
    const double hn = reduced_hamiltonian(k.sector, k.spec).spectrum().values.back();
    for (double t : {0.0, 0.5, 1.0}) {
        const HeisenbergResiduals r = heisenberg_residuals(k.sector, k.spec, t);
        CHECK(r.heis1 < 1e-6);
        CHECK(r.heis2 < 1e-6);
        CHECK(r.heis3 < 1e-6);
        CHECK(r.x_identity < 1e-10);
        CHECK(r.y_identity < 1e-6);
        CHECK(nazero_residual(k.sector, k.spec, t) < 1e-6 * hn * hn);
    }
}

TEST_CASE("q-deformed oscillator relations") {
    for (double q : {0.5, 0.9}) {
        const QOperators ops = q_operators(0.6, q, 1.3, 80);
        const double Q = std::pow(q, 0.6 / 1.3);
        CHECK(ops.Qh == doctest::Approx(Q).epsilon(1e-15));
        const Eigen::MatrixXd d = ops.A * ops.Astar - Q * ops.Astar * ops.A - 0.6 * Eigen::MatrixXd::Identity(80, 80);
        CHECK(d.topLeftCorner(79, 79).norm() < 1e-12);
        CHECK(verify_q_relations(ops).pass);
    }
    // q -> 1 recovers the undeformed weights hbar (n + 1).
    const QOperators near = q_operators(1.0, 1.0 - 1e-9, 1.0, 30);
    for (int n = 0; n < 29; ++n) CHECK(near.g_seq[n] == doctest::Approx(n + 1.0).epsilon(1e-6));
}

TEST_CASE("sector validation and the truncation override") {
    const SystemSpec s = preset_spec(PresetKind::Krawtchouk, {});
    CHECK_THROWS_AS(build_sector(s, {0}, 10), ValidationError);
    CHECK_THROWS_AS(build_sector(s, {0, -1}, 10), ValidationError);
    ::setenv("KUMMER_TRUNCATION", "37", 1);
    CHECK(default_truncation() == 37);
    ::setenv("KUMMER_TRUNCATION", "many", 1);
    CHECK_THROWS_AS(default_truncation(), ValidationError);
    ::unsetenv("KUMMER_TRUNCATION");
    CHECK(default_truncation() == 256);
}
