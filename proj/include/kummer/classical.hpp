#pragma once

#include <array>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kummer/expr.hpp"
#include "kummer/ode.hpp"
#include "kummer/system.hpp"

namespace kummer {

struct ActionAngleState {
    std::vector<double> I;    // I_0..I_N
    std::vector<double> psi;  // psi_0..psi_N
};

// I_k = sum_j rho_kj |z_j|^2, psi_l = sum_j kappa_jl arg z_j. Throws "outside Omega" if some z_k = 0.
ActionAngleState to_action_angle(std::span<const std::complex<double>> z, const SystemSpec& spec);
// Inverse map: |z_j|^2 = sum_k kappa_jk I_k, arg z_j = sum_l rho_lj psi_l.
std::vector<std::complex<double>> from_action_angle(const ActionAngleState& state, const SystemSpec& spec);

// The open interval a < I0 < b of the reduced space over momentum c (b may be +inf, a may be -inf).
struct ConeBounds {
    double a = -std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();
    bool bounded() const { return b < std::numeric_limits<double>::infinity(); }
};
ConeBounds cone_bounds(const SystemSpec& spec, std::span<const double> c);

// Classical reduced system over a fixed momentum value: G0(I0), H0(I0) and their
// derivatives come from symbolic differentiation of the expression trees.
class ReducedSystem {
public:
    ReducedSystem(const SystemSpec& spec, std::vector<double> c);

    const SystemSpec& spec() const { return spec_; }
    const std::vector<double>& c() const { return c_; }
    const ConeBounds& cone() const { return cone_; }

    double G0(double i0) const;
    double dG0(double i0, int k = 0) const;  // d G0 / d I_k
    double H0(double i0) const;
    double dH0(double i0, int k = 0) const;  // d H0 / d I_k
    double Gtilde(double i0) const;

    double energy(double i0, double psi0) const;
    std::array<double, 2> rhs(double i0, double psi0) const;  // (dI0/dt, dpsi0/dt)
    double angle_rate(int k, double i0, double psi0) const;    // d psi_k / dt, k = 1..N

    // Casimir C(x, y, I0) = -(x^2 + y^2 - G0(I0))/2 as an expression over (x, y, I0).
    Expr casimir_expr() const;
    // Expressions over (x, y, I0) for the coordinates and the Hamiltonian H0(I0) + 2x.
    Expr hamiltonian_xyz_expr() const;

private:
    std::vector<double> actions(double i0) const;
    SystemSpec spec_;
    std::vector<double> c_;
    ConeBounds cone_;
    Expr g_, h_, gt_;
    std::vector<Expr> dg_, dh_;
};

std::array<double, 2> reduced_rhs(const SystemSpec& spec, std::span<const double> c, double i0, double psi0);

struct ReducedTrajectory {
    std::vector<double> t, i0, psi0, x, y, energy_drift, casimir_drift;
    double energy = 0.0;
    bool completed = true;
    std::string status = "ok";
};

// Adaptive Dormand-Prince integration of the reduced equations, sampled every dt_hint.
ReducedTrajectory integrate_reduced(const SystemSpec& spec, std::span<const double> c, double i0_init,
                                    double psi0_init, double t_end, double dt_hint, const OdeOptions& options = {});

struct QuadratureTrajectory {
    std::vector<double> t, i0;
    std::vector<double> turning_points;  // found on either side of the start, ascending
    double period = 0.0;                 // 0 when the motion is not periodic
};

// I0(t) from t(I0) = int dI0 / +-sqrt(4 G0 - (E - H0)^2), sampled every dt up to t_end.
QuadratureTrajectory integrate_quadrature(const SystemSpec& spec, std::span<const double> c, double energy,
                                          double i0_init, int branch_sign, double t_end, double dt);

struct AngleSeries {
    std::vector<double> t;
    std::vector<std::vector<double>> psi;      // psi[k-1][sample], unwrapped
    std::vector<std::vector<double>> psi_mod;  // the same reduced to [0, 2 pi)
};

// psi_k(t) for k = 1..N along a reduced trajectory, starting from psi_init (length N).
AngleSeries reconstruct_angles(const SystemSpec& spec, std::span<const double> c, const ReducedTrajectory& traj,
                               std::span<const double> psi_init, const OdeOptions& options = {});

struct KummerPoint {
    double x, y, i0;
};

// Grid over (I0, psi0) in (a, b) x (0, 2 pi]; for an unbounded cone the I0 range is (a, i0_max).
std::vector<KummerPoint> kummer_shape_sample(const SystemSpec& spec, std::span<const double> c, int n_i0,
                                             int n_angle, double i0_max = 0.0);

// det[grad C, grad f, grad g] at a point of (x, y, I0) space.
double nambu_bracket(const Expr& C, const Expr& f, const Expr& g, const std::array<double, 3>& point);

struct XYOverlay {
    std::vector<double> t, x_angle, y_angle, x_energy, y_rate;
    double max_dx = 0.0, max_dy = 0.0, max_casimir = 0.0, max_energy = 0.0;
};

// x, y computed from psi0 and from x = (E - H0)/2, y = (dI0/dt)/2, with the residuals of
// the shape and energy equations along the trajectory.
XYOverlay xyI_trajectory(const SystemSpec& spec, std::span<const double> c, double energy,
                         const ReducedTrajectory& traj);

} // namespace kummer
