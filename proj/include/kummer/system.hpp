#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kummer/expr.hpp"

namespace kummer {

// Resonance matrix rho with sum_j rho_ij l_j = delta_0i, and kappa = rho^{-1}.
// Column 0 of kappa equals the exponent vector l.
struct ResonanceMatrix {
    Eigen::MatrixXd rho;
    Eigen::MatrixXd kappa;
};

// The coupling g0 as an expression over the occupations x_0..x_N.
struct Coupling {
    Expr expr;
    bool constant = true;
    double value = 1.0;  // meaningful only when constant
};

// Everything that defines a system of N+1 resonantly coupled oscillators.
struct SystemSpec {
    std::vector<int> l;
    ResonanceMatrix resonance;
    Coupling g0;
    Expr h0;
    double hbar = 1.0;

    int modes() const { return static_cast<int>(l.size()); }  // N + 1
    int n_invariants() const { return modes() - 1; }          // N
};

// Throws ValidationError unless l is nonzero and not all components are negative.
void validate_exponents(const std::vector<int>& l);

// Row 0 is l/(l.l); rows 1..N complete it to a basis orthogonal to l (Gram-Schmidt on
// the standard basis).
ResonanceMatrix default_resonance_matrix(const std::vector<int>& l);

// Validates rho against l and computes kappa.
ResonanceMatrix make_resonance(const Eigen::MatrixXd& rho, const std::vector<int>& l);

Coupling make_coupling(const Expr& g0);

// Builds and validates a full system description. Omitted rho triggers default_resonance_matrix.
SystemSpec make_spec(const std::vector<int>& l, const std::optional<Eigen::MatrixXd>& rho,
                     const Expr& g0, const Expr& h0, double hbar);

// P_l(x, hbar): prod_{k=1}^{l}(x + k hbar) for l > 0, 1 for l = 0,
// prod_{k=0}^{|l|-1}(x - k hbar) for l < 0.
double eval_P(int li, double x, double hbar);

// Occupation values kappa . (a0, c_1..c_N).
std::vector<double> occupations(const SystemSpec& spec, double a0, std::span<const double> c);

// g0(x)^2 prod_i P_{l_i}(x_i) at x = kappa . (a0, c).
double structural_fn_quantum(const SystemSpec& spec, double a0, std::span<const double> c);
// Same, given the occupations directly.
double structural_fn_quantum_occ(const SystemSpec& spec, std::span<const double> x);

// g0(x)^2 prod_i x_i^{|l_i|} with hbar-terms removed; throws "outside cone" for x_i < 0.
double structural_fn_classical(const SystemSpec& spec, double i0, std::span<const double> c);

// g0^2 prod_{l_i>0} x_i^{l_i} / prod_{l_j<0} x_j^{|l_j|}.
double structural_fn_tilde(const SystemSpec& spec, double i0, std::span<const double> c);

// h0(kappa . (a0, c)); the hbar node is set to the system's hbar when quantum is true, else 0.
double free_energy(const SystemSpec& spec, double a0, std::span<const double> c, bool quantum);

// Classical expressions over the actions (I_0, I_1..I_N), used for symbolic derivatives.
Expr classical_structural_expr(const SystemSpec& spec);
Expr classical_free_expr(const SystemSpec& spec);
Expr classical_tilde_expr(const SystemSpec& spec);

nlohmann::json spec_to_json(const SystemSpec& spec);
SystemSpec spec_from_json(const nlohmann::json& doc);

} // namespace kummer
