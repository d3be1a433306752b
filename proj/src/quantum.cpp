#include "kummer/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>

#include "kummer/errors.hpp"
#include "kummer/tridiagonal.hpp"

namespace kummer {

int default_truncation() {
    if (const char* env = std::getenv("KUMMER_TRUNCATION")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 2 && v <= 1'000'000) return static_cast<int>(v);
        throw ValidationError("quantum.truncation", "KUMMER_TRUNCATION must be an integer >= 2");
    }
    return 256;
}

namespace {

// Occupations hbar (v + n l) from exact integer arithmetic.
std::vector<double> ladder_occupations(const Sector& s, const std::vector<int>& l, int n) {
    std::vector<double> x(l.size());
    for (size_t i = 0; i < l.size(); ++i) x[i] = s.hbar * static_cast<double>(s.vacuum[i] + n * l[i]);
    return x;
}

double frobenius_block(const Eigen::MatrixXcd& m, int b) { return m.topLeftCorner(b, b).norm(); }
double frobenius_block(const Eigen::MatrixXd& m, int b) { return m.topLeftCorner(b, b).norm(); }

} // namespace

Sector build_sector(const SystemSpec& spec, const std::vector<int>& vacuum, int truncation) {
    const int n = spec.modes();
    if (static_cast<int>(vacuum.size()) != n)
        throw ValidationError("quantum.vacuum", "vacuum must have N+1 components");
    for (int v : vacuum)
        if (v < 0) throw ValidationError("quantum.vacuum", "vacuum occupations must be nonnegative");

    // v is a vacuum iff G_hbar vanishes one step below, i.e. some l_i > 0 has v_i < l_i.
    bool is_vacuum = false;
    for (int i = 0; i < n; ++i) is_vacuum = is_vacuum || (spec.l[i] > 0 && vacuum[i] < spec.l[i]);
    if (!is_vacuum) throw ValidationError("quantum.vacuum", "not a vacuum");

    Sector s;
    s.vacuum = vacuum;
    s.hbar = spec.hbar;
    s.c.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += spec.resonance.rho(i, j) * vacuum[j];
        s.c[i] = spec.hbar * sum;
    }

    int L = -1;
    for (int i = 0; i < n; ++i)
        if (spec.l[i] < 0) {
            const int cap = vacuum[i] / -spec.l[i];
            L = L < 0 ? cap : std::min(L, cap);
        }
    s.finite = L >= 0;
    if (s.finite) {
        s.L = L;
        s.dim = L + 1;
        s.truncation = s.dim;
    } else {
        if (truncation < 2) throw ValidationError("quantum.truncation", "truncation must be at least 2");
        s.dim = truncation;
        s.truncation = truncation;
    }

    s.g_seq.resize(std::max(0, s.dim - 1));
    for (int k = 0; k + 1 < s.dim; ++k) {
        const double g = structural_fn_quantum_occ(spec, ladder_occupations(s, spec.l, k));
        if (!(g > 0.0) || !std::isfinite(g))
            throw ValidationError("quantum.coupling",
                                  "structural function is not positive inside the sector at n = " + std::to_string(k));
        s.g_seq[k] = g;
    }
    return s;
}

TridiagonalOperator::TridiagonalOperator(std::vector<double> diag, std::vector<double> off, std::string label)
    : diag_(std::move(diag)), off_(std::move(off)), label_(std::move(label)) {
    if (!diag_.empty() && off_.size() + 1 != diag_.size())
        throw ValidationError("quantum.operator", "off-diagonal length must be one less than the diagonal");
}

Eigen::MatrixXd TridiagonalOperator::dense() const {
    const int d = dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = diag_[i];
    for (int i = 0; i + 1 < d; ++i) m(i, i + 1) = m(i + 1, i) = off_[i];
    return m;
}

double TridiagonalOperator::norm_bound() const {
    double best = 0.0;
    const int d = dim();
    for (int i = 0; i < d; ++i) {
        double r = std::fabs(diag_[i]);
        if (i > 0) r += std::fabs(off_[i - 1]);
        if (i + 1 < d) r += std::fabs(off_[i]);
        best = std::max(best, r);
    }
    return best;
}

const Spectrum& TridiagonalOperator::spectrum() const {
    std::call_once(cache_->once, [this] { cache_->value = kummer::spectrum(*this); });
    return cache_->value;
}

Spectrum spectrum(const TridiagonalOperator& op) {
    const auto& d = op.diag();
    const auto& e = op.off();
    const int n = op.dim();
    auto eig = tridiagonal_eigen(d, e, EigenvectorMode::Full);
    Spectrum out;
    out.values = std::move(eig.values);
    out.vectors = std::move(eig.vectors);
    for (int j = 0; j < n; ++j) {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double hv = d[i] * out.vectors(i, j);
            if (i > 0) hv += e[i - 1] * out.vectors(i - 1, j);
            if (i + 1 < n) hv += e[i] * out.vectors(i + 1, j);
            const double r = hv - out.values[j] * out.vectors(i, j);
            r2 += r * r;
        }
        out.max_residual = std::max(out.max_residual, std::sqrt(r2));
    }
    const Eigen::MatrixXd gram = out.vectors.transpose() * out.vectors - Eigen::MatrixXd::Identity(n, n);
    out.orthogonality = n > 0 ? gram.cwiseAbs().maxCoeff() : 0.0;
    const double scale = std::max(1.0, op.norm_bound());
    if (out.max_residual > 1e-10 * scale || out.orthogonality > 1e-10)
        throw NumericalError("quantum.spectrum", "eigenpair residual check failed for " + op.label(),
                             out.max_residual / scale);
    return out;
}

ReducedOperators reduced_operators(const Sector& sector) {
    const int d = sector.dim;
    std::vector<double> a0(d), zeros(std::max(0, d - 1), 0.0), sq(std::max(0, d - 1)), half(std::max(0, d - 1));
    for (int k = 0; k < d; ++k) a0[k] = sector.a0(k);
    for (int k = 0; k + 1 < d; ++k) {
        sq[k] = std::sqrt(sector.g_seq[k]);
        half[k] = 0.5 * sq[k];
    }
    ReducedOperators ops{TridiagonalOperator(a0, zeros, "A0"), TridiagonalOperator(std::vector<double>(d, 0.0), half, "X"),
                         Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXcd()};
    for (int k = 0; k + 1 < d; ++k) ops.A(k, k + 1) = sq[k];
    ops.Astar = ops.A.transpose();
    const std::complex<double> inv2i(0.0, -0.5);
    ops.Y = inv2i * (ops.A - ops.Astar).cast<std::complex<double>>();
    return ops;
}

RelationReport verify_relations(const Sector& sector, const SystemSpec& spec, double tol) {
    const auto ops = reduced_operators(sector);
    const int d = sector.dim;
    const auto tail = sector.momentum();
    const Eigen::MatrixXd A0 = ops.A0.dense();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d), Gm = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        G(k, k) = structural_fn_quantum(spec, sector.a0(k), tail);
        Gm(k, k) = structural_fn_quantum(spec, sector.a0(k) - sector.hbar, tail);
    }
    RelationReport rep;
    rep.block = sector.interior();
    double gmax = 0.0;
    for (double g : sector.g_seq) gmax = std::max(gmax, g);
    rep.scale = std::max(1.0, gmax);
    const double h = sector.hbar;
    auto add = [&](const std::string& name, const Eigen::MatrixXd& m) {
        RelationItem it;
        it.name = name;
        it.norm = frobenius_block(m, rep.block);
        it.relative = it.norm / rep.scale;
        it.pass = it.relative <= tol;
        rep.pass = rep.pass && it.pass;
        rep.items.push_back(it);
    };
    add("[A0,A] + hbar A", A0 * ops.A - ops.A * A0 + h * ops.A);
    add("[A0,A*] - hbar A*", A0 * ops.Astar - ops.Astar * A0 - h * ops.Astar);
    add("A*A - G(A0 - hbar)", ops.Astar * ops.A - Gm);
    add("AA* - G(A0)", ops.A * ops.Astar - G);
    return rep;
}

TridiagonalOperator reduced_hamiltonian(const Sector& sector, const SystemSpec& spec) {
    const int d = sector.dim;
    std::vector<double> diag(d), off(std::max(0, d - 1));
    for (int k = 0; k < d; ++k) diag[k] = spec.h0.eval(ladder_occupations(sector, spec.l, k), spec.hbar);
    for (int k = 0; k + 1 < d; ++k) off[k] = std::sqrt(sector.g_seq[k]);
    return TridiagonalOperator(std::move(diag), std::move(off), "H");
}

Eigen::MatrixXd diagonal_function(const Sector& sector, const std::function<double(double)>& f) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(sector.dim, sector.dim);
    for (int k = 0; k < sector.dim; ++k) m(k, k) = f(sector.a0(k));
    return m;
}

HeisenbergEvolver::HeisenbergEvolver(const Sector& sector, const SystemSpec& spec)
    : sector_(sector), hbar_(spec.hbar), H_(reduced_hamiltonian(sector, spec)) {
    const Spectrum& sp = H_.spectrum();
    V_ = sp.vectors;
    lambda_ = Eigen::Map<const Eigen::VectorXd>(sp.values.data(), static_cast<Eigen::Index>(sp.values.size()));
}

Eigen::MatrixXcd HeisenbergEvolver::evolve(const Eigen::MatrixXcd& op, double t) const {
    const int d = static_cast<int>(lambda_.size());
    if (op.rows() != d || op.cols() != d) throw ValidationError("quantum.operator", "operator dimension mismatch");
    const Eigen::MatrixXcd V = V_.cast<std::complex<double>>();
    Eigen::MatrixXcd W = V.transpose() * op * V;
    for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) W(j, k) *= std::polar(1.0, -(lambda_(j) - lambda_(k)) * t / hbar_);
    return V * W * V.transpose();
}

Eigen::MatrixXcd heisenberg_evolve(const Sector& sector, const SystemSpec& spec, const Eigen::MatrixXcd& op,
                                   double t) {
    return HeisenbergEvolver(sector, spec).evolve(op, t);
}

namespace {

// For truncated sectors the dynamics runs in a padded copy of the sector so that the
// truncation edge stays far from the reported block.
Sector dynamics_sector(const Sector& sector, const SystemSpec& spec) {
    if (sector.finite) return sector;
    return build_sector(spec, sector.vacuum, 2 * sector.dim + 32);
}

struct DynamicsContext {
    Sector sector;
    HeisenbergEvolver evolver;
    ReducedOperators ops;
    Eigen::MatrixXcd H, H0, G, Gm;
    double delta;
    int block;
};

DynamicsContext make_context(const Sector& reported, const SystemSpec& spec) {
    Sector s = dynamics_sector(reported, spec);
    HeisenbergEvolver ev(s, spec);
    auto ops = reduced_operators(s);
    const auto tail = s.momentum();
    const int d = s.dim;
    Eigen::MatrixXcd H0 = Eigen::MatrixXcd::Zero(d, d), G = H0, Gm = H0;
    const auto& hd = ev.hamiltonian().diag();
    for (int k = 0; k < d; ++k) {
        H0(k, k) = hd[k];
        G(k, k) = structural_fn_quantum(spec, s.a0(k), tail);
        Gm(k, k) = structural_fn_quantum(spec, s.a0(k) - s.hbar, tail);
    }
    const double hnorm = std::max(1e-300, ev.hamiltonian().norm_bound());
    const double delta = 0.01 * spec.hbar / hnorm;
    Eigen::MatrixXcd H = ev.hamiltonian().dense().cast<std::complex<double>>();
    return DynamicsContext{s, std::move(ev), std::move(ops), std::move(H), std::move(H0), std::move(G), std::move(Gm),
                           delta, reported.interior()};
}

Eigen::MatrixXcd five_point(const HeisenbergEvolver& ev, const Eigen::MatrixXcd& op, double t, double dt) {
    return (ev.evolve(op, t - 2 * dt) - 8.0 * ev.evolve(op, t - dt) + 8.0 * ev.evolve(op, t + dt) -
            ev.evolve(op, t + 2 * dt)) /
           (12.0 * dt);
}

} // namespace

HeisenbergResiduals heisenberg_residuals(const Sector& sector, const SystemSpec& spec, double t) {
    const auto ctx = make_context(sector, spec);
    const auto& ev = ctx.evolver;
    const std::complex<double> ih(0.0, spec.hbar);
    const Eigen::MatrixXcd A0 = ctx.ops.A0.dense().cast<std::complex<double>>();
    const Eigen::MatrixXcd X = ctx.ops.X.dense().cast<std::complex<double>>();
    const Eigen::MatrixXcd& Y = ctx.ops.Y;

    const Eigen::MatrixXcd A0t = ev.evolve(A0, t), Xt = ev.evolve(X, t), Yt = ev.evolve(Y, t);
    const Eigen::MatrixXcd H0t = ev.evolve(ctx.H0, t), Gt = ev.evolve(ctx.G, t), Gmt = ev.evolve(ctx.Gm, t);
    const Eigen::MatrixXcd dA0 = five_point(ev, A0, t, ctx.delta);
    const Eigen::MatrixXcd dX = five_point(ev, X, t, ctx.delta);
    const Eigen::MatrixXcd dY = five_point(ev, Y, t, ctx.delta);
    const std::complex<double> i1(0.0, 1.0);

    HeisenbergResiduals r;
    const int b = ctx.block;
    r.heis1 = frobenius_block(Eigen::MatrixXcd(ih * dA0 - (ctx.H * A0t - A0t * ctx.H)), b);
    r.heis2 = frobenius_block(Eigen::MatrixXcd(ih * dX - (H0t * Xt - Xt * H0t)), b);
    r.heis3 = frobenius_block(Eigen::MatrixXcd(ih * dY - (H0t * Yt - Yt * H0t) - i1 * (Gt - Gmt)), b);
    r.x_identity = frobenius_block(Eigen::MatrixXcd(Xt - 0.5 * (ctx.H - H0t)), b);
    r.y_identity = frobenius_block(Eigen::MatrixXcd(Yt - 0.5 * dA0), b);
    return r;
}

double nazero_residual(const Sector& sector, const SystemSpec& spec, double t) {
    const auto ctx = make_context(sector, spec);
    const auto& ev = ctx.evolver;
    const Eigen::MatrixXcd A0 = ctx.ops.A0.dense().cast<std::complex<double>>();
    const Eigen::MatrixXcd dA0 = five_point(ev, A0, t, ctx.delta);
    const Eigen::MatrixXcd H0t = ev.evolve(ctx.H0, t), Gt = ev.evolve(ctx.G, t), Gmt = ev.evolve(ctx.Gm, t);
    const Eigen::MatrixXcd D = ctx.H - H0t;
    const Eigen::MatrixXcd R = dA0 * dA0 - 2.0 * (Gt + Gmt) + D * D;
    const int b = ctx.block;
    Eigen::MatrixXcd blockm = R.topLeftCorner(b, b);
    blockm = 0.5 * (blockm + blockm.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blockm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

QOperators q_operators(double hbar, double q, double alpha, int truncation) {
    if (!(hbar > 0.0)) throw ValidationError("spec.hbar", "hbar must be positive");
    if (!(q > 0.0) || q == 1.0) throw ValidationError("quantum.q", "q must be positive and different from 1");
    if (!(alpha > 0.0)) throw ValidationError("quantum.q", "alpha must be positive");
    if (truncation < 2) throw ValidationError("quantum.truncation", "truncation must be at least 2");
    const double lam = std::log(q) / alpha;  // log(q) is accurate near q = 1 when q is representable
    QOperators ops{hbar, q, alpha, std::exp(lam * hbar), {}, {}, {}, {}};
    const int d = truncation;
    ops.g_seq.resize(d - 1);
    const double den = std::expm1(lam * hbar);
    for (int n = 0; n + 1 < d; ++n) ops.g_seq[n] = hbar * (std::expm1(lam * hbar * (n + 1)) / den);
    ops.A = Eigen::MatrixXd::Zero(d, d);
    for (int n = 0; n + 1 < d; ++n) ops.A(n, n + 1) = std::sqrt(ops.g_seq[n]);
    ops.Astar = ops.A.transpose();
    ops.Q = Eigen::MatrixXd::Zero(d, d);
    for (int n = 0; n < d; ++n) ops.Q(n, n) = std::exp(lam * hbar * n);
    return ops;
}

RelationReport verify_q_relations(const QOperators& ops, double tol) {
    const int d = static_cast<int>(ops.A.rows());
    RelationReport rep;
    rep.block = d - 1;
    double gmax = 0.0;
    for (double g : ops.g_seq) gmax = std::max(gmax, g);
    rep.scale = std::max(1.0, gmax);
    auto add = [&](const std::string& name, double norm) {
        RelationItem it;
        it.name = name;
        it.norm = norm;
        it.relative = norm / rep.scale;
        it.pass = it.relative <= tol;
        rep.pass = rep.pass && it.pass;
        rep.items.push_back(it);
    };
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    add("AQ - Qh QA", frobenius_block(Eigen::MatrixXd(ops.A * ops.Q - ops.Qh * ops.Q * ops.A), rep.block));
    add("QA* - Qh A*Q", frobenius_block(Eigen::MatrixXd(ops.Q * ops.Astar - ops.Qh * ops.Astar * ops.Q), rep.block));
    add("AA* - Qh A*A - hbar",
        frobenius_block(Eigen::MatrixXd(ops.A * ops.Astar - ops.Qh * ops.Astar * ops.A - ops.hbar * I), rep.block));
    // hbar [n] as the geometric sum hbar (1 + Qh + ... + Qh^{n-1}), independent of the expm1 form.
    Eigen::MatrixXd nq = Eigen::MatrixXd::Zero(d, d);
    double partial = 0.0, power = 1.0;
    for (int n = 1; n < d; ++n) {
        partial += power;
        power *= ops.Qh;
        nq(n, n) = ops.hbar * partial;
    }
    add("A*A - hbar[n]", frobenius_block(Eigen::MatrixXd(ops.Astar * ops.A - nq), rep.block));
    if (ops.Qh < 1.0) {
        // ||A||^2 = max_n hbar [n+1] stays below hbar/(1 - Qh).
        const double bound = ops.hbar / -std::expm1(std::log(ops.Qh));
        add("||A||^2 <= hbar/(1 - Qh)", std::max(0.0, gmax - bound * (1.0 + 1e-15)));
    }
    return rep;
}

} // namespace kummer
