#include "kummer/system.hpp"

#include <cmath>
#include <cstdlib>

#include "kummer/errors.hpp"
#include "kummer/tolerances.hpp"

namespace kummer {

void validate_exponents(const std::vector<int>& l) {
    if (l.empty()) throw ValidationError("spec.exponents", "exponent vector is empty");
    bool any_nonzero = false;
    bool any_nonnegative = false;
    for (int li : l) {
        any_nonzero = any_nonzero || li != 0;
        any_nonnegative = any_nonnegative || li >= 0;
    }
    if (!any_nonzero) throw ValidationError("spec.exponents", "exponent vector is zero");
    if (!any_nonnegative) throw ValidationError("spec.exponents", "all exponents are negative");
}

ResonanceMatrix default_resonance_matrix(const std::vector<int>& l) {
    validate_exponents(l);
    const int n = static_cast<int>(l.size());
    Eigen::VectorXd lv(n);
    for (int i = 0; i < n; ++i) lv(i) = l[i];
    const double ll = lv.squaredNorm();

    Eigen::MatrixXd rho(n, n);
    rho.row(0) = lv.transpose() / ll;
    // Orthonormal basis of the complement of l, seeded with l itself.
    std::vector<Eigen::VectorXd> basis{lv / std::sqrt(ll)};
    int row = 1;
    for (int j = 0; j < n && row < n; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, j);
        for (const auto& b : basis) v -= b.dot(v) * b;
        for (const auto& b : basis) v -= b.dot(v) * b;  // second pass for stability
        const double norm = v.norm();
        if (norm < 1e-8) continue;
        v /= norm;
        basis.push_back(v);
        rho.row(row++) = v.transpose();
    }
    if (row != n) throw ValidationError("spec.resonance", "resonance construction failed");
    return make_resonance(rho, l);
}

ResonanceMatrix make_resonance(const Eigen::MatrixXd& rho, const std::vector<int>& l) {
    validate_exponents(l);
    const int n = static_cast<int>(l.size());
    if (rho.rows() != n || rho.cols() != n)
        throw ValidationError("spec.resonance", "resonance matrix has the wrong shape");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(rho);
    if (std::fabs(lu.determinant()) <= tol::resonance_det)
        throw ValidationError("spec.resonance", "resonance matrix is singular");
    Eigen::VectorXd lv(n);
    for (int i = 0; i < n; ++i) lv(i) = l[i];
    const Eigen::VectorXd r = rho * lv - Eigen::VectorXd::Unit(n, 0);
    const double scale = 1.0 + rho.cwiseAbs().maxCoeff() * lv.cwiseAbs().maxCoeff();
    if (r.cwiseAbs().maxCoeff() > tol::algebraic * scale)
        throw ValidationError("spec.resonance", "resonance condition sum_j rho_ij l_j = delta_0i violated");
    ResonanceMatrix out{rho, lu.inverse()};
    const double err = (out.kappa * rho - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (err > tol::algebraic * (1.0 + out.kappa.cwiseAbs().maxCoeff() * rho.cwiseAbs().maxCoeff()))
        throw ValidationError("spec.resonance", "kappa * rho differs from the identity");
    // Column 0 of kappa is l exactly; remove rounding so that occupations stay integral.
    for (int i = 0; i < n; ++i) out.kappa(i, 0) = l[i];
    return out;
}

Coupling make_coupling(const Expr& g0) {
    Coupling c;
    c.expr = g0;
    c.constant = g0.is_constant();
    if (c.constant) {
        c.value = g0.eval(std::vector<double>{}, 0.0);
        if (!(c.value > 0.0) || !std::isfinite(c.value))
            throw ValidationError("spec.coupling", "constant coupling must be positive");
    }
    return c;
}

SystemSpec make_spec(const std::vector<int>& l, const std::optional<Eigen::MatrixXd>& rho,
                     const Expr& g0, const Expr& h0, double hbar) {
    validate_exponents(l);
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ValidationError("spec.hbar", "hbar must be positive");
    SystemSpec spec;
    spec.l = l;
    spec.resonance = rho ? make_resonance(*rho, l) : default_resonance_matrix(l);
    spec.g0 = make_coupling(g0);
    spec.h0 = h0;
    spec.hbar = hbar;
    const int n = spec.modes();
    if (g0.max_arg() >= n || h0.max_arg() >= n)
        throw ValidationError("spec.arguments", "expression refers to an occupation beyond the mode count");
    if (!spec.g0.constant) {
        // Sample the closed positive orthant on a small grid, quantum and classical.
        const double grid[] = {0.0, 0.25, 1.0, 4.0, 16.0};
        std::vector<int> idx(n, 0);
        std::vector<double> x(n);
        while (true) {
            for (int i = 0; i < n; ++i) x[i] = grid[idx[i]];
            for (double hb : {hbar, 0.0}) {
                const double v = g0.eval(x, hb);
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ValidationError("spec.coupling", "coupling is not positive on the positive orthant");
            }
            int k = 0;
            while (k < n && ++idx[k] == 5) idx[k++] = 0;
            if (k == n) break;
        }
    }
    return spec;
}

double eval_P(int li, double x, double hbar) {
    double p = 1.0;
    if (li > 0) {
        for (int k = 1; k <= li; ++k) p *= x + k * hbar;
    } else {
        for (int k = 0; k < -li; ++k) p *= x - k * hbar;
    }
    return p;
}

std::vector<double> occupations(const SystemSpec& spec, double a0, std::span<const double> c) {
    const int n = spec.modes();
    if (static_cast<int>(c.size()) != n - 1)
        throw ValidationError("spec.momentum", "momentum vector must have N components");
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        double s = spec.resonance.kappa(i, 0) * a0;
        for (int j = 1; j < n; ++j) s += spec.resonance.kappa(i, j) * c[j - 1];
        x[i] = s;
    }
    return x;
}

double structural_fn_quantum_occ(const SystemSpec& spec, std::span<const double> x) {
    const double g = spec.g0.constant ? spec.g0.value : spec.g0.expr.eval(x, spec.hbar);
    double p = g * g;
    for (int i = 0; i < spec.modes(); ++i) p *= eval_P(spec.l[i], x[i], spec.hbar);
    return p;
}

double structural_fn_quantum(const SystemSpec& spec, double a0, std::span<const double> c) {
    const auto x = occupations(spec, a0, c);
    return structural_fn_quantum_occ(spec, x);
}

namespace {

void require_in_cone(const std::vector<double>& x, double i0, std::span<const double> c) {
    double scale = 1.0 + std::fabs(i0);
    for (double ci : c) scale += std::fabs(ci);
    for (double xi : x)
        if (xi < -tol::algebraic * scale) throw ValidationError("classical.cone", "outside cone");
}

} // namespace

double structural_fn_classical(const SystemSpec& spec, double i0, std::span<const double> c) {
    const auto x = occupations(spec, i0, c);
    require_in_cone(x, i0, c);
    const double g = spec.g0.constant ? spec.g0.value : spec.g0.expr.eval(x, 0.0);
    double p = g * g;
    for (int i = 0; i < spec.modes(); ++i) p *= std::pow(x[i], std::abs(spec.l[i]));
    return p;
}

double structural_fn_tilde(const SystemSpec& spec, double i0, std::span<const double> c) {
    const auto x = occupations(spec, i0, c);
    require_in_cone(x, i0, c);
    const double g = spec.g0.constant ? spec.g0.value : spec.g0.expr.eval(x, 0.0);
    double p = g * g;
    for (int i = 0; i < spec.modes(); ++i) {
        if (spec.l[i] > 0) p *= std::pow(x[i], spec.l[i]);
        if (spec.l[i] < 0) {
            if (!(x[i] > 0.0)) throw ValidationError("classical.cone", "outside cone");
            p /= std::pow(x[i], -spec.l[i]);
        }
    }
    return p;
}

double free_energy(const SystemSpec& spec, double a0, std::span<const double> c, bool quantum) {
    const auto x = occupations(spec, a0, c);
    return spec.h0.eval(x, quantum ? spec.hbar : 0.0);
}

namespace {

std::vector<Expr> occupation_exprs(const SystemSpec& spec) {
    const int n = spec.modes();
    std::vector<Expr> x;
    for (int i = 0; i < n; ++i) {
        Expr s = 0.0;
        for (int k = 0; k < n; ++k) s = s + Expr(spec.resonance.kappa(i, k)) * Expr::arg(k);
        x.push_back(s);
    }
    return x;
}

} // namespace

Expr classical_structural_expr(const SystemSpec& spec) {
    const auto x = occupation_exprs(spec);
    const Expr g = spec.g0.expr.substitute(x);
    Expr p = pow(g, 2);
    for (int i = 0; i < spec.modes(); ++i) p = p * pow(x[i], std::abs(spec.l[i]));
    return p;
}

Expr classical_free_expr(const SystemSpec& spec) { return spec.h0.substitute(occupation_exprs(spec)); }

Expr classical_tilde_expr(const SystemSpec& spec) {
    const auto x = occupation_exprs(spec);
    Expr p = pow(spec.g0.expr.substitute(x), 2);
    for (int i = 0; i < spec.modes(); ++i) p = p * pow(x[i], spec.l[i]);
    return p;
}

nlohmann::json spec_to_json(const SystemSpec& spec) {
    nlohmann::json doc;
    doc["l"] = spec.l;
    nlohmann::json rho = nlohmann::json::array();
    for (int i = 0; i < spec.modes(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < spec.modes(); ++j) row.push_back(spec.resonance.rho(i, j));
        rho.push_back(row);
    }
    doc["rho"] = rho;
    doc["g0"] = spec.g0.expr.to_json();
    doc["h0"] = spec.h0.to_json();
    doc["hbar"] = spec.hbar;
    return doc;
}

SystemSpec spec_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("system.json", "system document must be a JSON object");
    for (const char* key : {"l", "g0", "h0", "hbar"})
        if (!doc.contains(key)) throw ValidationError("system.json", std::string("missing field \"") + key + "\"");
    if (!doc["l"].is_array()) throw ValidationError("system.json", "\"l\" must be an integer array");
    std::vector<int> l;
    for (const auto& v : doc["l"]) {
        if (!v.is_number_integer()) throw ValidationError("system.json", "\"l\" must be an integer array");
        l.push_back(v.get<int>());
    }
    std::optional<Eigen::MatrixXd> rho;
    if (doc.contains("rho") && !doc["rho"].is_null()) {
        const auto& r = doc["rho"];
        const int n = static_cast<int>(l.size());
        if (!r.is_array() || static_cast<int>(r.size()) != n)
            throw ValidationError("system.json", "\"rho\" must be an (N+1)x(N+1) array");
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i) {
            if (!r[i].is_array() || static_cast<int>(r[i].size()) != n)
                throw ValidationError("system.json", "\"rho\" must be an (N+1)x(N+1) array");
            for (int j = 0; j < n; ++j) {
                if (!r[i][j].is_number()) throw ValidationError("system.json", "\"rho\" entries must be numbers");
                m(i, j) = r[i][j].get<double>();
            }
        }
        rho = m;
    }
    if (!doc["hbar"].is_number()) throw ValidationError("system.json", "\"hbar\" must be a number");
    return make_spec(l, rho, Expr::from_json(doc["g0"]), Expr::from_json(doc["h0"]), doc["hbar"].get<double>());
}

} // namespace kummer
