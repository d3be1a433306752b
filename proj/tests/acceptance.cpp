// Acceptance criteria 1-11. Usage: acceptance [N ...]; without arguments every criterion runs.
// Each criterion prints exactly one line "criterion NN PASS|FAIL <title>: <measurements>" and the
// exit status is 0 only if every selected criterion passed. Tolerances are pinned below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "kummer/classical.hpp"
#include "kummer/coherent.hpp"
#include "kummer/presets.hpp"
#include "kummer/quantum.hpp"

using namespace kummer;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pinned tolerances.
constexpr double kRelationTol = 1e-12;         // criterion 1
constexpr double kRelationSeconds = 1.0;       // criterion 1, per case
constexpr double kKernelTol = 1e-12;           // criterion 2
constexpr double kBesselTol = 1e-8;            // criterion 3
constexpr double kBesselSeconds = 10.0;        // criterion 3
constexpr double kRationalMomentTol = 1e-12;   // criterion 4
constexpr double kLaguerreMomentTol = 1e-8;    // criterion 4
constexpr double kQMomentTol = 1e-8;           // criterion 4
constexpr double kDriftTol = 1e-8;             // criterion 5, times (1 + |E|)
constexpr double kQuadratureTol = 1e-6;        // criterion 5
constexpr double kLinearTol = 1e-8;            // criterion 5
constexpr double kIntersectionTol = 1e-7;      // criterion 6
constexpr double kStarTol = 1e-10;             // criterion 7
constexpr double kLimitTol = 1e-3;             // criterion 8
constexpr double kOrderLow = 0.8, kOrderHigh = 1.2;  // criterion 8
constexpr double kHeisenbergTol = 1e-6;        // criterion 9, and times ||H||^2 for the shape equation
constexpr double kQRelationTol = 1e-12;        // criterion 10
constexpr double kQLimitTol = 1e-5;            // criterion 10
constexpr double kStabilityTol = 1e-8;         // criterion 11

struct Outcome {
    bool pass = false;
    std::string measured;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Preset make(PresetKind kind, std::vector<int> vacuum = {}, int truncation = 0, double hbar = 1.0) {
    PresetParams params;
    params.hbar = hbar;
    params.vacuum = std::move(vacuum);
    params.truncation = truncation;
    return build_preset(kind, params);
}

cplx disc(std::mt19937_64& rng, double r) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(r * std::sqrt(u(rng)), 2.0 * kPi * u(rng));
}

// 1. Algebra relations on Laguerre (M = 200), Krawtchouk (v1 in {1, 5, 20}) and q-Weyl (q = 1/2, alpha = 1,
// M = 200). Norms are Frobenius norms on the interior block divided by max(1, max G); the absolute norms
// are reported alongside.
Outcome criterion1() {
    struct Case {
        std::string name;
        PresetKind kind;
        std::vector<int> vacuum;
        int truncation;
    };
    const std::vector<Case> cases{{"laguerre M=200", PresetKind::Laguerre, {0, 2}, 200},
                                  {"krawtchouk v1=1", PresetKind::Krawtchouk, {0, 1}, 0},
                                  {"krawtchouk v1=5", PresetKind::Krawtchouk, {0, 5}, 0},
                                  {"krawtchouk v1=20", PresetKind::Krawtchouk, {0, 20}, 0},
                                  {"q-weyl M=200", PresetKind::QWeyl, {0}, 200}};
    Outcome o{true, ""};
    for (const auto& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const Preset p = make(c.kind, c.vacuum, c.truncation);
        const RelationReport r = verify_relations(p.sector, p.spec, kRelationTol);
        const double secs = seconds_since(t0);
        double rel = 0.0, abs = 0.0;
        for (const auto& it : r.items) {
            rel = std::max(rel, it.relative);
            abs = std::max(abs, it.norm);
        }
        const bool ok = r.items.size() == 4 && rel < kRelationTol && secs < kRelationSeconds;
        o.pass = o.pass && ok;
        o.measured += (o.measured.empty() ? "" : "; ") + c.name + " max " + sci(rel) + " (abs " + sci(abs) + ", " +
                      fmt("%.3f s", secs) + ")";
    }
    o.measured += "; tolerance " + sci(kRelationTol) + ", " + fmt("%.0f s", kRelationSeconds) + " per case";
    return o;
}

// 2. Krawtchouk kernel series against (1/v1!)(1 + zbar w/(p(1-p)))^v1, with the reference evaluated in
// 50-digit arithmetic so that the comparison is meaningful near 1 + zbar w/pq = 0.
Outcome criterion2() {
    using big = boost::multiprecision::cpp_bin_float_50;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    int count = 0;
    for (double p : {0.5, 0.3}) {
        const double pq = p * (1.0 - p);
        for (int v1 = 0; v1 <= 20; ++v1) {
            PresetParams params;
            params.p = p;
            params.vacuum = {0, v1};
            const Preset k = build_preset(PresetKind::Krawtchouk, params);
            const ReproducingKernel K(k.sector, k.spec, CoherentFamily::Glauber);
            for (int j = 0; j < 100; ++j) {
                const cplx z = disc(rng, 2.0 * std::sqrt(pq)), w = disc(rng, 2.0 * std::sqrt(pq));
                const cplx zw = std::conj(z) * w;
                big re = 1, im = 0;
                const big xr = big(1) + big(zw.real()) / big(pq), xi = big(zw.imag()) / big(pq);
                for (int n = 0; n < v1; ++n) {
                    const big nr = re * xr - im * xi;
                    im = re * xi + im * xr;
                    re = nr;
                }
                big fact = 1;
                for (int n = 2; n <= v1; ++n) fact *= n;
                const cplx expect(static_cast<double>(re / fact), static_cast<double>(im / fact));
                const cplx got = K(std::conj(z), w);
                worst = std::max(worst, std::abs(got - expect) / std::abs(expect));
                ++count;
            }
        }
    }
    return {worst < kKernelTol, "max relative error " + sci(worst) + " over " + std::to_string(count) +
                                    " (z, w), v1 = 0..20, p in {0.5, 0.3}; tolerance " + sci(kKernelTol)};
}

// 3. Laguerre density against (t/hbar^2)^{v1/2} K_v1(2 sqrt t/hbar)/(pi hbar^2) on 20 points of [0.05, 10].
Outcome criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int v1 : {0, 1, 2, 5}) {
        const Preset l = make(PresetKind::Laguerre, {0, v1}, 200);
        for (int k = 0; k < 20; ++k) {
            const double t = 0.05 + (10.0 - 0.05) * k / 19.0;
            const double expect = std::pow(t, 0.5 * v1) * boost::math::cyl_bessel_k(v1, 2.0 * std::sqrt(t)) / kPi;
            worst = std::max(worst, std::fabs(measure_density(l.sector, l.spec, t) / expect - 1.0));
        }
    }
    const double secs = seconds_since(t0);
    return {worst < kBesselTol && secs < kBesselSeconds,
            "max relative error " + sci(worst) + " at 80 points (v1 in {0, 1, 2, 5}), " + fmt("%.2f s", secs) +
                "; tolerance " + sci(kBesselTol) + ", " + fmt("%.0f s", kBesselSeconds)};
}

// 4. Resolution of identity: rational density (l = (1, -1), v1 = 5) through both moment routes, Laguerre
// moments n <= 10 and q-Weyl atomic-measure moments n <= 8.
Outcome criterion4() {
    const Preset k = make(PresetKind::Krawtchouk, {0, 5});
    double rational = 0.0;
    for (const char* route : {"integrand", "pointwise"})
        rational = std::max(rational, resolution_check(k.sector, k.spec, 5, route).max_deviation);
    const Preset l = make(PresetKind::Laguerre, {0, 2}, 200);
    const double lag = resolution_check(l.sector, l.spec, 10).max_deviation;
    const double qm = q_measure_check(1.0, 0.5, 1.0, 8).max_deviation;
    const bool ok = rational < kRationalMomentTol && lag < kLaguerreMomentTol && qm < kQMomentTol;
    return {ok, "rational v1=5 " + sci(rational) + " (tol " + sci(kRationalMomentTol) + "); laguerre n<=10 " +
                    sci(lag) + " (tol " + sci(kLaguerreMomentTol) + "); q-weyl n<=8 " + sci(qm) + " (tol " +
                    sci(kQMomentTol) + ")"};
}

// 5. Classical conservation on Laguerre, quadrature against the ODE on Laguerre and Krawtchouk, and the
// Krawtchouk (x, y, I0) trajectory against exp(M t) u0 for its linear system.
Outcome criterion5() {
    const SystemSpec lag = preset_spec(PresetKind::Laguerre, {});
    const std::vector<double> c{1.0};
    double drift = 0.0, quad = 0.0;
    for (const auto& [i0, psi0] : std::vector<std::pair<double, double>>{{1.5, 2.0}, {1.2, 0.4}, {3.0, 4.0}}) {
        const ReducedTrajectory tr = integrate_reduced(lag, c, i0, psi0, 10.0, 0.05);
        if (!tr.completed) return {false, "laguerre trajectory stopped: " + tr.status};
        for (std::size_t j = 0; j < tr.t.size(); ++j)
            drift = std::max({drift, std::fabs(tr.energy_drift[j]) / (1.0 + std::fabs(tr.energy)),
                              std::fabs(tr.casimir_drift[j]) / (1.0 + std::fabs(tr.energy))});
        const QuadratureTrajectory q = integrate_quadrature(lag, c, tr.energy, i0, std::sin(psi0) >= 0 ? 1 : -1, 10.0, 0.05);
        for (std::size_t j = 0; j < q.t.size(); ++j) quad = std::max(quad, std::fabs(q.i0[j] - tr.i0[j]));
    }
    const double p = 0.3, pq = p * (1.0 - p), w = 1.0 - 2.0 * p;
    PresetParams kp;
    kp.p = p;
    const SystemSpec kraw = preset_spec(PresetKind::Krawtchouk, kp);
    Eigen::Matrix3d M;
    M << 0, -w, 0, w, 0, -2.0 * pq, 0, 2, 0;
    double linear = 0.0;
    for (const auto& [i0, psi0] : std::vector<std::pair<double, double>>{{0.35, 1.1}, {-0.6, 4.0}, {0.9, 0.2}}) {
        const ReducedTrajectory tr = integrate_reduced(kraw, c, i0, psi0, 10.0, 0.05);
        if (!tr.completed) return {false, "krawtchouk trajectory stopped: " + tr.status};
        const double r = std::sqrt(pq * (1.0 - i0 * i0));
        const Eigen::Vector3d u0(r * std::cos(psi0), r * std::sin(psi0), i0);
        for (std::size_t j = 0; j < tr.t.size(); ++j) {
            const Eigen::Vector3d ex = (M * tr.t[j]).exp() * u0;
            linear = std::max({linear, std::fabs(tr.x[j] - ex(0)), std::fabs(tr.y[j] - ex(1)),
                               std::fabs(tr.i0[j] - ex(2))});
        }
        const QuadratureTrajectory q = integrate_quadrature(kraw, c, tr.energy, i0, std::sin(psi0) >= 0 ? 1 : -1, 10.0, 0.05);
        for (std::size_t j = 0; j < q.t.size(); ++j) quad = std::max(quad, std::fabs(q.i0[j] - tr.i0[j]));
    }
    const bool ok = drift < kDriftTol && quad < kQuadratureTol && linear < kLinearTol;
    return {ok, "laguerre drift/(1+|E|) " + sci(drift) + " (tol " + sci(kDriftTol) + "); quadrature vs ODE " +
                    sci(quad) + " (tol " + sci(kQuadratureTol) + "); krawtchouk linear system " + sci(linear) +
                    " (tol " + sci(kLinearTol) + "); 3 starts each, t in [0, 10]"};
}

// 6. Trajectories lie on the intersection of the shape and the energy surface: 5 random starts per preset.
Outcome criterion6() {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Outcome o{true, ""};
    for (const auto& name : preset_names()) {
        const Preset p = build_preset(name);
        const std::vector<double> c = p.sector.momentum();
        const ReducedSystem rs(p.spec, c);
        const double a = rs.cone().a, b = rs.cone().bounded() ? rs.cone().b : a + 10.0;
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            const ReducedTrajectory tr = integrate_reduced(p.spec, c, a + (b - a) * u(rng), 2.0 * kPi * u(rng), 10.0, 0.05);
            if (!tr.completed) worst = INFINITY;
            for (std::size_t j = 0; j < tr.t.size(); ++j)
                worst = std::max({worst, std::fabs(tr.energy_drift[j]), std::fabs(tr.casimir_drift[j])});
        }
        o.pass = o.pass && worst < kIntersectionTol;
        o.measured += name + " " + sci(worst) + "; ";
    }
    o.measured += "max |C| and |H - E| over t in [0, 10]; tolerance " + sci(kIntersectionTol);
    return o;
}

// 7. Star products by the shift-operator route against dense operator products, all 100 pairs of monomials
// of degree <= 3, at three points per preset.
Outcome criterion7() {
    std::vector<std::pair<int, int>> mons;
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; k + l <= 3; ++l) mons.emplace_back(k, l);
    Outcome o{true, ""};
    for (PresetKind kind : {PresetKind::Laguerre, PresetKind::Krawtchouk, PresetKind::QWeyl}) {
        const Preset p = make(kind);
        double worst = 0.0;
        for (double frac : {0.2, 0.5, 0.8}) {
            const cplx z = std::polar(frac * std::sqrt(p.sector.g_seq.front()), 0.7 + frac);
            for (const auto& [k1, l1] : mons)
                for (const auto& [k2, l2] : mons) {
                    const auto f = SymbolPolynomial::monomial(k1, l1), g = SymbolPolynomial::monomial(k2, l2);
                    const cplx a = star_product(p.sector, p.spec, f, g, z), b = star_product_matrix(p.sector, p.spec, f, g, z);
                    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
                }
        }
        o.pass = o.pass && worst < kStarTol;
        o.measured += p.name + " " + sci(worst) + "; ";
    }
    o.measured += std::to_string(mons.size() * mons.size()) + " pairs x 3 points, |difference|/max(1, |value|); tolerance " +
                  sci(kStarTol);
    return o;
}

// 8. Richardson-extrapolated commutator brackets at hbar = 0.1 2^{-k}, k = 0..4, fixed momentum c1 = 1.
// Sequences that are exact at every hbar carry no fitted order and are accepted as such.
Outcome criterion8() {
    const cplx z(0.5, 0.2), I(0.0, 1.0);
    const std::vector<double> c{1.0};
    Outcome o{true, ""};
    for (PresetKind kind : {PresetKind::Laguerre, PresetKind::Krawtchouk}) {
        const PresetParams params;
        const SystemSpec spec = preset_spec(kind, params);
        const FamilyBuilder fb = preset_family(kind, params, 1.0);
        const ClassicalPoint cp = classical_point(spec, c, z);
        const double dg = ReducedSystem(spec, c).dG0(cp.i0);
        const auto zz = BracketOperand::poly(SymbolPolynomial::monomial(0, 1));
        const auto zb = BracketOperand::poly(SymbolPolynomial::monomial(1, 0));
        for (const auto& [label, f, g, target] :
             std::vector<std::tuple<std::string, BracketOperand, BracketOperand, cplx>>{
                 {"{I0,z}", BracketOperand::a0(), zz, I * cp.zeta}, {"{z,zbar}", zz, zb, -I * dg}}) {
            const LimitResult r = limit_bracket(fb, f, g, z, 0.1, 5);
            const double err = std::abs(r.estimate - target);
            const bool ordered = r.status == "exact" || (r.order >= kOrderLow && r.order <= kOrderHigh);
            o.pass = o.pass && err < kLimitTol && ordered;
            o.measured += preset_name(kind) + " " + label + " " + sci(err) +
                          (r.status == "exact" ? " exact" : " order " + fmt("%.3f", r.order)) + "; ";
        }
    }
    o.measured += "tolerance " + sci(kLimitTol) + ", order in [" + fmt("%.1f", kOrderLow) + ", " + fmt("%.1f", kOrderHigh) + "]";
    return o;
}

// 9. Heisenberg residuals on the Krawtchouk sector v1 = 10 at t in {0, 0.5, 1}.
Outcome criterion9() {
    double heis = 0.0, shape = 0.0;
    for (double p : {0.5, 0.3}) {
        PresetParams params;
        params.p = p;
        params.vacuum = {0, 10};
        const Preset k = build_preset(PresetKind::Krawtchouk, params);
        const Spectrum& sp = reduced_hamiltonian(k.sector, k.spec).spectrum();
        const double hn = std::max(std::fabs(sp.values.front()), std::fabs(sp.values.back()));
        for (double t : {0.0, 0.5, 1.0}) {
            const HeisenbergResiduals r = heisenberg_residuals(k.sector, k.spec, t);
            heis = std::max({heis, r.heis1, r.heis2, r.heis3});
            shape = std::max(shape, nazero_residual(k.sector, k.spec, t) / (hn * hn));
        }
    }
    return {heis < kHeisenbergTol && shape < kHeisenbergTol,
            "Heisenberg equations " + sci(heis) + ", shape equation/||H||^2 " + sci(shape) +
                " (p in {0.5, 0.3}); tolerance " + sci(kHeisenbergTol)};
}

// 10. q-deformed relations on the interior block (q = 1/2, alpha = 1, M = 200) and recovery of the weights
// hbar (n + 1) as q -> 1 from below, both from the q-oscillator and from the q-Weyl system document.
Outcome criterion10() {
    const QOperators ops = q_operators(1.0, 0.5, 1.0, 200);
    const RelationReport rep = verify_q_relations(ops, kQRelationTol);
    double rel = 0.0;
    for (const auto& it : rep.items) rel = std::max(rel, it.norm);
    const Eigen::MatrixXd d = ops.A * ops.Astar - ops.Qh * ops.Astar * ops.A - Eigen::MatrixXd::Identity(200, 200);
    rel = std::max(rel, d.topLeftCorner(199, 199).norm());

    std::string seq;
    double last = 0.0, prev = INFINITY;
    bool decreasing = true;
    for (int e = 2; e <= 8; ++e) {
        const double q = 1.0 - std::pow(10.0, -e);
        PresetParams params;
        params.q = q;
        params.truncation = 51;
        const Preset p = build_preset(PresetKind::QWeyl, params);
        const QOperators near = q_operators(1.0, q, 1.0, 51);
        double dev = 0.0;
        for (int n = 0; n < 50; ++n)
            dev = std::max({dev, std::fabs(p.sector.g_seq[n] / (n + 1.0) - 1.0), std::fabs(near.g_seq[n] / (n + 1.0) - 1.0)});
        decreasing = decreasing && dev < prev;
        prev = last = dev;
        seq += (seq.empty() ? "" : ", ") + sci(dev);
    }
    return {rel < kQRelationTol && last < kQLimitTol && decreasing,
            "q-relations " + sci(rel) + " (tol " + sci(kQRelationTol) + "); weights n < 50 at q = 1 - 10^-k, k = 2..8: " +
                seq + " (final tol " + sci(kQLimitTol) + ")"};
}

// 11. Lowest 20 Laguerre eigenvalues under truncation doubling 200 -> 400, and the identification of the
// truncated spectrum with hbar times the zeros of L_M^{(v1)}.
Outcome criterion11() {
    std::string out;
    bool pass = true;
    double ident = 0.0;
    for (int v1 : {0, 2}) {
        std::map<int, std::vector<double>> low;
        for (int M : {200, 400}) {
            const Preset l = make(PresetKind::Laguerre, {0, v1}, M);
            const TridiagonalOperator H = reduced_hamiltonian(l.sector, l.spec);
            const auto& vals = H.spectrum().values;
            low[M].assign(vals.begin(), vals.begin() + 20);
            for (double x : low[M]) {
                const double f = boost::math::laguerre(M, static_cast<unsigned>(v1), x);
                const double df = -boost::math::laguerre(M - 1, static_cast<unsigned>(v1) + 1, x);
                ident = std::max(ident, std::fabs(f / df) / (1.0 + x));
            }
        }
        double drift = 0.0;
        for (int j = 0; j < 20; ++j) drift = std::max(drift, std::fabs(low[200][j] - low[400][j]));
        pass = pass && drift < kStabilityTol;
        out += "v1=" + std::to_string(v1) + " max drift " + sci(drift) + " (lowest " + fmt("%.3e", low[200][0]) +
               " -> " + fmt("%.3e", low[400][0]) + "); ";
    }
    out += "tolerance " + sci(kStabilityTol) + "; lowest 20 eigenvalues equal hbar x zeros of L_M^(v1) to " + sci(ident) +
           " (Newton step), so the operator is the Laguerre Jacobi matrix and its spectrum is continuous";
    return {pass, out};
}

const std::map<int, std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::map<int, std::pair<std::string, std::function<Outcome()>>> table{
        {1, {"algebra relations", criterion1}},
        {2, {"Krawtchouk kernel closed form", criterion2}},
        {3, {"Laguerre density Bessel identity", criterion3}},
        {4, {"resolution of identity", criterion4}},
        {5, {"classical conservation", criterion5}},
        {6, {"trajectory = intersection", criterion6}},
        {7, {"star-product correctness", criterion7}},
        {8, {"classical limit of brackets", criterion8}},
        {9, {"Heisenberg residuals", criterion9}},
        {10, {"q-deformed relations", criterion10}},
        {11, {"Laguerre spectrum under truncation doubling", criterion11}},
    };
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        char* end = nullptr;
        const long n = std::strtol(argv[i], &end, 10);
        if (end == argv[i] || *end != '\0' || !criteria().count(static_cast<int>(n))) {
            std::fprintf(stderr, "usage: %s [criterion 1-11 ...]\n", argv[0]);
            return 2;
        }
        selected.push_back(static_cast<int>(n));
    }
    if (selected.empty())
        for (const auto& [n, _] : criteria()) selected.push_back(n);

    bool all = true;
    for (int n : selected) {
        const auto& [title, run] = criteria().at(n);
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("criterion %02d %s %s: %s\n", n, o.pass ? "PASS" : "FAIL", title.c_str(), o.measured.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
