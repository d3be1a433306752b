#include <algorithm>
#include <cmath>
#include <random>

#include "commands.hpp"
#include "kummer/classical.hpp"
#include "kummer/coherent.hpp"
#include "kummer/quantum.hpp"

namespace kummer::cli {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class F>
void guarded(std::vector<CheckRow>& rows, const std::string& module, const std::string& name, double tolerance,
             F&& check) {
    CheckRow row{module, name, 0.0, tolerance, false, ""};
    try {
        row.deviation = check(row.detail);
        row.pass = std::isfinite(row.deviation) && row.deviation < tolerance;
    } catch (const std::exception& e) {
        row.deviation = std::numeric_limits<double>::infinity();
        row.detail = e.what();
    }
    rows.push_back(std::move(row));
}

void classical_rows(std::vector<CheckRow>& rows, const Preset& p, std::mt19937_64& rng) {
    const std::vector<double> c = p.sector.momentum();
    guarded(rows, "classical", "trajectory on shape and energy surfaces, 5 starts, t in [0, 10]", 1e-7,
            [&](std::string& detail) {
                const ReducedSystem rs(p.spec, c);
                const double a = rs.cone().a, b = rs.cone().bounded() ? rs.cone().b : a + 10.0;
                std::uniform_real_distribution<double> u(0.05, 0.95);
                double worst = 0.0;
                for (int k = 0; k < 5; ++k) {
                    const double i0 = a + (b - a) * u(rng), psi0 = 2.0 * kPi * u(rng);
                    const ReducedTrajectory tr = integrate_reduced(p.spec, c, i0, psi0, 10.0, 0.1);
                    if (!tr.completed) {
                        detail = tr.status;
                        return std::numeric_limits<double>::infinity();
                    }
                    for (std::size_t j = 0; j < tr.t.size(); ++j)
                        worst = std::max({worst, std::fabs(tr.energy_drift[j]), std::fabs(tr.casimir_drift[j])});
                }
                return worst;
            });
}

void quantum_rows(std::vector<CheckRow>& rows, const Preset& p) {
    // Truncated sectors: the truncation defect at the top row travels inward, so only short times are checked.
    const Sector s = p.sector.finite ? p.sector : build_sector(p.spec, p.params.vacuum, std::min(64, p.sector.dim));
    const std::vector<double> times = s.finite ? std::vector<double>{0.0, 0.5, 1.0} : std::vector<double>{0.0, 0.25};
    const std::string when = s.finite ? "t in {0, 0.5, 1}" : "t in {0, 0.25}, M = " + std::to_string(s.dim);
    guarded(rows, "quantum", "Heisenberg equations, " + when, 1e-6, [&](std::string&) {
        double worst = 0.0;
        for (double t : times) {
            const HeisenbergResiduals r = heisenberg_residuals(s, p.spec, t);
            worst = std::max({worst, r.heis1, r.heis2, r.heis3, r.x_identity, r.y_identity});
        }
        return worst;
    });
    guarded(rows, "quantum", "shape equation of motion / ||H||^2, " + when, 1e-6, [&](std::string&) {
        const TridiagonalOperator H = reduced_hamiltonian(s, p.spec);
        const Spectrum& sp = H.spectrum();
        const double hn = std::max(std::fabs(sp.values.front()), std::fabs(sp.values.back()));
        double worst = 0.0;
        for (double t : times) worst = std::max(worst, nazero_residual(s, p.spec, t));
        return worst / (hn * hn);
    });
}

void coherent_rows(std::vector<CheckRow>& rows, const Preset& p) {
    const Sector s = p.sector.finite ? p.sector : build_sector(p.spec, p.params.vacuum, std::min(200, p.sector.dim));
    guarded(rows, "coherent", "star product vs operator product, degree <= 3", 1e-10, [&](std::string& detail) {
        const cplx z = std::polar(0.5 * std::sqrt(s.g_seq.front()), 0.7);
        std::vector<std::pair<int, int>> mons;
        for (int k = 0; k <= 3; ++k)
            for (int l = 0; k + l <= 3; ++l) mons.emplace_back(k, l);
        double worst = 0.0;
        for (const auto& [k1, l1] : mons)
            for (const auto& [k2, l2] : mons) {
                const auto f = SymbolPolynomial::monomial(k1, l1), g = SymbolPolynomial::monomial(k2, l2);
                const cplx a = star_product(s, p.spec, f, g, z), b = star_product_matrix(s, p.spec, f, g, z);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
            }
        detail = std::to_string(mons.size() * mons.size()) + " pairs";
        return worst;
    });
    if (p.kind != PresetKind::Laguerre && p.kind != PresetKind::Krawtchouk) return;

    const double c1 = 1.0;
    const cplx z(0.5, 0.2);
    const FamilyBuilder builder = preset_family(p.kind, p.params, c1);
    const std::vector<double> c{c1};
    const ClassicalPoint cp = classical_point(p.spec, c, z);
    const double dg = ReducedSystem(p.spec, c).dG0(cp.i0);
    const cplx I(0.0, 1.0);
    const auto a0 = BracketOperand::a0();
    const auto zz = BracketOperand::poly(SymbolPolynomial::monomial(0, 1));
    const auto zb = BracketOperand::poly(SymbolPolynomial::monomial(1, 0));
    auto bracket = [&](const std::string& name, const BracketOperand& f, const BracketOperand& g, cplx target) {
        guarded(rows, "coherent", name, 1e-3, [&](std::string& detail) {
            const LimitResult r = limit_bracket(builder, f, g, z, 0.1, 5);
            char buf[64];
            std::snprintf(buf, sizeof buf, "status %s, order %.3f", r.status.c_str(), r.order);
            detail = buf;
            const bool ordered = r.status == "exact" || (r.order >= 0.8 && r.order <= 1.2);
            return ordered ? std::abs(r.estimate - target) : std::numeric_limits<double>::infinity();
        });
    };
    bracket("hbar -> 0 limit of {I0, z} = i z", a0, zz, I * cp.zeta);
    bracket("hbar -> 0 limit of {z, zbar} = -i dG0/dI0", zz, zb, -I * dg);
}

} // namespace

std::vector<CheckRow> verify_all_rows(const Preset& preset, std::uint64_t seed) {
    std::vector<CheckRow> rows;
    for (const auto& it : golden_suite(preset, seed).items)
        rows.push_back({"examples", it.name, it.deviation, it.tolerance, it.pass, it.detail});
    std::mt19937_64 rng(seed);
    classical_rows(rows, preset, rng);
    quantum_rows(rows, preset);
    coherent_rows(rows, preset);
    return rows;
}

} // namespace kummer::cli
