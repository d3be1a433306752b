#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kummer/system.hpp"

namespace kummer {

// Default truncation for infinite sectors: 256, overridable through the environment
// variable KUMMER_TRUNCATION.
int default_truncation();

// A reduced Hilbert space spanned by the ladder v + n l above a vacuum v.
struct Sector {
    std::vector<int> vacuum;      // v_0..v_N
    std::vector<double> c;        // c_0..c_N, c_i = hbar sum_j rho_ij v_j
    double hbar = 1.0;
    bool finite = false;
    int L = -1;                   // top level for finite sectors
    int dim = 0;                  // L + 1, or the truncation M
    int truncation = 0;
    std::vector<double> g_seq;    // G_hbar(n) for n = 0..dim-2

    double a0(int n) const { return c[0] + hbar * n; }          // A0 eigenvalue label c0 + hbar n
    std::vector<double> momentum() const { return {c.begin() + 1, c.end()}; }  // c_1..c_N
    // Rows and columns on which truncation-aware identities hold exactly.
    int interior() const { return finite ? dim : dim - 1; }
};

Sector build_sector(const SystemSpec& spec, const std::vector<int>& vacuum, int truncation = default_truncation());

struct Spectrum {
    std::vector<double> values;   // ascending
    Eigen::MatrixXd vectors;      // columns
    double max_residual = 0.0;    // max_j ||H v_j - lambda_j v_j||
    double orthogonality = 0.0;   // ||V^T V - I||_max
};

// Real symmetric tridiagonal operator. Its spectrum is computed once, on first request,
// behind a mutex, and shared by copies.
class TridiagonalOperator {
public:
    TridiagonalOperator() = default;
    TridiagonalOperator(std::vector<double> diag, std::vector<double> off, std::string label);

    const std::vector<double>& diag() const { return diag_; }
    const std::vector<double>& off() const { return off_; }
    const std::string& label() const { return label_; }
    int dim() const { return static_cast<int>(diag_.size()); }
    Eigen::MatrixXd dense() const;
    double norm_bound() const;  // max row sum of absolute values
    const Spectrum& spectrum() const;

private:
    struct Cache {
        std::once_flag once;
        Spectrum value;
    };
    std::vector<double> diag_, off_;
    std::string label_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// Symmetric tridiagonal eigensolver (implicit QL) with residual and orthogonality checks.
// Throws NumericalError if the residual exceeds 1e-10 ||H||.
Spectrum spectrum(const TridiagonalOperator& op);

struct ReducedOperators {
    TridiagonalOperator A0;   // diag c0 + hbar n
    TridiagonalOperator X;    // (A + A*)/2
    Eigen::MatrixXd A;        // A e_n = sqrt(G(n-1)) e_{n-1}
    Eigen::MatrixXd Astar;    // transpose of A
    Eigen::MatrixXcd Y;       // (A - A*)/(2i)
};
ReducedOperators reduced_operators(const Sector& sector);

struct RelationItem {
    std::string name;
    double norm = 0.0;        // Frobenius norm on the checked block
    double relative = 0.0;    // norm / max(1, ||A||^2)
    bool pass = false;
};
struct RelationReport {
    std::vector<RelationItem> items;
    int block = 0;
    double scale = 1.0;
    bool pass = true;
};

// [A0,A] + hbar A, [A0,A*] - hbar A*, A*A - G(A0 - hbar), AA* - G(A0) on the interior block.
RelationReport verify_relations(const Sector& sector, const SystemSpec& spec, double tol = 1e-12);

// H = H0(A0, c) + A + A*.
TridiagonalOperator reduced_hamiltonian(const Sector& sector, const SystemSpec& spec);

// Diagonal operator f(A0) for a function of the A0 label.
Eigen::MatrixXd diagonal_function(const Sector& sector, const std::function<double(double)>& f);

// Unitary conjugation F(t) = e^{-iHt/hbar} F e^{iHt/hbar} from the eigendecomposition of H.
class HeisenbergEvolver {
public:
    HeisenbergEvolver(const Sector& sector, const SystemSpec& spec);
    Eigen::MatrixXcd evolve(const Eigen::MatrixXcd& op, double t) const;
    const TridiagonalOperator& hamiltonian() const { return H_; }
    const Sector& sector() const { return sector_; }

private:
    Sector sector_;
    double hbar_;
    TridiagonalOperator H_;
    Eigen::MatrixXd V_;
    Eigen::VectorXd lambda_;
};

Eigen::MatrixXcd heisenberg_evolve(const Sector& sector, const SystemSpec& spec, const Eigen::MatrixXcd& op,
                                   double t);

struct HeisenbergResiduals {
    double heis1 = 0.0;       // i hbar dA0/dt - [H, A0(t)], and against 2 i hbar Y(t)
    double heis2 = 0.0;       // i hbar dX/dt - [H0(A0(t)), X(t)]
    double heis3 = 0.0;       // i hbar dY/dt - [H0(A0(t)), Y(t)] - i (G(A0(t)) - G(A0(t) - hbar))
    double x_identity = 0.0;  // X(t) - (H - H0(A0(t)))/2
    double y_identity = 0.0;  // Y(t) - (dA0/dt)/2
};

// Residuals (interior-block Frobenius norms) with time derivatives from a five-point stencil.
HeisenbergResiduals heisenberg_residuals(const Sector& sector, const SystemSpec& spec, double t);

// Interior-block spectral norm of (dA0/dt)^2 - 2[G(A0(t)) + G(A0(t) - hbar)] + [H - H0(A0(t))]^2.
double nazero_residual(const Sector& sector, const SystemSpec& spec, double t);

struct QOperators {
    double hbar, q, alpha;
    double Qh;                   // q^{hbar/alpha}
    std::vector<double> g_seq;   // hbar [n+1]
    Eigen::MatrixXd A, Astar, Q; // Q = diag q^{hbar n/alpha}
};

// Truncated q-deformed Heisenberg-Weyl operators over the vacuum c0 = 0.
QOperators q_operators(double hbar, double q, double alpha, int truncation);

// AQ - Qh QA, QA* - Qh A*Q, AA* - Qh A*A - hbar, A*A - hbar [n], and the norm bound.
RelationReport verify_q_relations(const QOperators& ops, double tol = 1e-12);

} // namespace kummer
