#pragma once

#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kummer/quantum.hpp"
#include "kummer/system.hpp"

namespace kummer {

using cplx = std::complex<double>;

// Two normalizations of reduced coherent states, both with kernel K(zbar, w) = sum_n k_n (zbar w)^n
// and k_0 = 1/(v_0! ... v_N!).
//   Eigen:   k_{n+1}/k_n = 1/G_hbar(n). The states are eigenvectors of A.
//   Glauber: k_{n+1}/k_n = 1/Gt(n), Gt(n) = g0^2 prod_{l_i>0} P_{l_i}(x_i) / prod_{l_j<0} P_{l_j}(x_j) at the
//            ladder occupations x = hbar(v + n l). These are the reductions of products of Glauber states.
// The two coincide when no exponent is negative.
enum class CoherentFamily { Eigen, Glauber };

CoherentFamily parse_family(const std::string& name);
std::string family_name(CoherentFamily family);

// log k_n for n = 0..n_max; -inf beyond the top level of a finite sector.
std::vector<double> log_kernel_coefficients(const Sector& sector, const SystemSpec& spec, CoherentFamily family,
                                            int n_max);

struct CoherentState {
    cplx z;
    CoherentFamily family = CoherentFamily::Eigen;
    Eigen::VectorXcd unit;     // the state divided by its norm, length sector.dim
    double log_norm_sq = 0.0;  // log <z|z> of the untruncated series
    double norm_sq = 0.0;      // <z|z>, which may underflow to 0 or overflow for extreme parameters
    double tail = 0.0;         // relative weight of the series beyond the truncation

    // Coefficients with the kernel normalization: coeffs[n] = sqrt(k_n) z^n.
    Eigen::VectorXcd coeffs() const;
};

// Builds |z> over the sector. Infinite sectors: throws ValidationError "outside convergence disc" if
// the series diverges and NumericalError "increase truncation" if the tail beyond M exceeds 1e-14.
CoherentState coherent_state(const Sector& sector, const SystemSpec& spec, cplx z,
                             CoherentFamily family = CoherentFamily::Eigen);

// ||A|z> - z|z>|| / |||z>|| over all rows but the last one.
double eigenvector_residual(const Sector& sector, const CoherentState& state);

class ReproducingKernel {
public:
    ReproducingKernel(const Sector& sector, const SystemSpec& spec, CoherentFamily family);

    // Direct series with term recurrence. Constant couplings use the exact rational ratio form with
    // 50-digit accumulation; otherwise the ratios come from the structural function in long double.
    cplx operator()(cplx zbar, cplx w) const;
    double coefficient(int n) const;  // k_n

    // Hypergeometric form K = k0 * rFs[1, alpha; beta; x_scale * zbar w], available for the Glauber
    // family with constant coupling (and for the Eigen family when no exponent is negative).
    bool has_hypergeometric() const { return has_pfq_; }
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& beta() const { return beta_; }
    double x_scale() const { return x_scale_; }
    cplx hypergeometric(cplx zbar, cplx w) const;

private:
    double ratio(int n) const;  // k_{n+1}/k_n
    cplx rational_series(cplx zbar, cplx w) const;
    Sector sector_;
    SystemSpec spec_;
    CoherentFamily family_;
    double log_k0_;
    bool has_pfq_ = false;
    std::vector<double> alpha_, beta_;
    std::vector<std::pair<int, int>> alpha_rational_, beta_rational_;  // numerator, denominator
    double x_scale_ = 0.0;
};

cplx kernel_eval(const Sector& sector, const SystemSpec& spec, cplx zbar, cplx w,
                 CoherentFamily family = CoherentFamily::Eigen);

// Reproducing measure density rho(t), t = |z|^2, of the Glauber family (constant coupling, l_0 > 0):
//   rho(t) = tau^{q-1} / (2 pi l0 hbar^{S} g0^2) int_{[0,inf)^N} prod x_j^{p_j} exp(-(T prod x_j^{s_j} + sum x_j)/hbar) dx
// with tau = t/g0^2, T = tau^{1/l0}, q = (v0+1)/l0, p_j = v_j - l_j q, s_j = -l_j/l0, S = sum v + N + 1.
// Gauss-Laguerre node counts double until successive estimates agree to 1e-10 (cap 8192 per axis);
// otherwise NumericalError "quadrature did not converge" with the achieved relative change.
double measure_density(const Sector& sector, const SystemSpec& spec, double t);

struct MomentReport {
    std::vector<double> moments;    // 2 pi int t^n rho(t) dt
    std::vector<double> expected;   // 1/k_n
    std::vector<double> deviation;  // relative
    double max_deviation = 0.0;
    std::string route;
};

// Moments of the density against the inverse kernel coefficients for n = 0..n_max (n <= L on finite
// sectors). Route "integrand": nested adaptive Gauss-Kronrod over (x, tau) of the density integrand
// (N <= 1). Route "pointwise": Gauss-Kronrod over u = t/(1+t) of measure_density values (N = 1 with
// exponent l_1 < 0).
MomentReport resolution_check(const Sector& sector, const SystemSpec& spec, int n_max,
                              const std::string& route = "integrand");

struct QMeasureReport {
    std::vector<double> deviation;  // relative deviation of the n-th moment
    double max_deviation = 0.0;
    int atoms = 0;
};

// Atomic measure of the q-deformed oscillator: atoms at |z|^2 = hbar Q^n/(1-Q), weights Q^n/K(Q x_n),
// Q = q^{hbar/alpha}; checks sum_n w_n x_n^m = hbar^m [m]! for m = 0..n_max.
QMeasureReport q_measure_check(double hbar, double q, double alpha, int n_max);

// Symbols as finite sums f_{k,l} zbar^k z^l, identified with the normally ordered operators A*^k A^l.
struct SymbolPolynomial {
    std::map<std::pair<int, int>, cplx> terms;
    static SymbolPolynomial monomial(int k, int l, cplx coeff = 1.0);
    int degree() const;
    cplx evaluate(cplx z) const;
};

Eigen::MatrixXcd operator_from_symbol(const Sector& sector, const SymbolPolynomial& f);

struct SymbolValue {
    cplx value;
    double tail = 0.0;
    bool tail_warning = false;  // truncation tail above 1e-10 of the value
};

SymbolValue covariant_symbol(const Sector& sector, const CoherentState& state, const Eigen::MatrixXcd& op);

// Symbol of the operator product by the shift-operator route: (f * g)(zbar, z) from the kernel series
// with the monomial rule A*^k A^l A*^r A^s -> zbar^k z^s sum_n k_n [G(n-1)..G(n-l)][G(n-1)..G(n-r)] zbar^{n-l} z^{n-r}.
// Eigen family; finite sectors cut the sum at j = min(L, L-k+l, L-s+r).
cplx star_product(const Sector& sector, const SystemSpec& spec, const SymbolPolynomial& f,
                  const SymbolPolynomial& g, cplx z);

// The same symbol through dense operators: <z|FG|z>/<z|z>.
cplx star_product_matrix(const Sector& sector, const SystemSpec& spec, const SymbolPolynomial& f,
                         const SymbolPolynomial& g, cplx z);

// I0 with Gt0(I0) = value on the cone over c (Gt0 is increasing there).
double tilde_inverse(const SystemSpec& spec, std::span<const double> c, double value);
// I0 with G0(I0) = value, on the increasing branch that starts at the lower cone edge.
double structural_inverse(const SystemSpec& spec, std::span<const double> c, double value);

// Operands of the limit bracket: A0 or a polynomial symbol.
struct BracketOperand {
    bool is_a0 = false;
    SymbolPolynomial symbol;
    static BracketOperand a0();
    static BracketOperand poly(const SymbolPolynomial& p);
};

struct ClassicalPoint {
    double i0;
    cplx zeta;   // classical value of the A symbol: sqrt(G0(I0)) e^{i arg z}
};
ClassicalPoint classical_point(const SystemSpec& spec, std::span<const double> c, cplx z);

struct LimitResult {
    std::vector<double> hbars;
    std::vector<cplx> values;
    cplx estimate;
    double order = 0.0;     // log2 of the ratio of successive differences
    std::string status;     // "ok", "exact" or "no convergence"
};

// (-i/hbar) <[F, G]> at hbar_k = hbar0 2^{-k}, k = 0..levels-1, with the family builder providing the
// spec and sector at each hbar; Richardson extrapolation 2 b_K - b_{K-1}.
using FamilyBuilder = std::function<std::pair<SystemSpec, Sector>(double hbar)>;
LimitResult limit_bracket(const FamilyBuilder& builder, const BracketOperand& f, const BracketOperand& g, cplx z,
                          double hbar0, int levels = 5);

// Multi-mode Wick star product of normally ordered symbols in (z_i, zbar_i), N+1 <= 2 modes,
// degree <= 3: sum_j hbar^{|j|}/j! d^j f/dz^j d^j g/dzbar^j.
struct MultiSymbol {
    int modes = 1;
    // key: (exponents of zbar_0..zbar_{N}, exponents of z_0..z_{N})
    std::map<std::pair<std::vector<int>, std::vector<int>>, cplx> terms;
    int degree() const;
    cplx evaluate(const std::vector<cplx>& z) const;
};
MultiSymbol glauber_star(const MultiSymbol& f, const MultiSymbol& g, double hbar);
cplx glauber_oracle(const MultiSymbol& f, const MultiSymbol& g, const std::vector<cplx>& z, double hbar);
// Dense Fock-space value <z|FG|z>/<z|z> with per-mode truncation.
cplx glauber_matrix(const MultiSymbol& f, const MultiSymbol& g, const std::vector<cplx>& z, double hbar,
                    int truncation);

} // namespace kummer
