#pragma once

namespace kummer::tol {

// Algebraic identities (relations, closed forms, resonance checks).
inline constexpr double algebraic = 1e-12;
// Dynamical quantities (integrator defaults, conservation budgets).
inline constexpr double dynamical = 1e-9;
// Default absolute and relative tolerance of the reduced ODE integrator.
inline constexpr double ode_abs = 1e-10;
inline constexpr double ode_rel = 1e-10;
// Relative agreement required between two successive Gauss-Laguerre estimates.
inline constexpr double gauss_laguerre = 1e-10;
// Largest Gauss-Laguerre rule tried before giving up.
inline constexpr int gauss_laguerre_max_nodes = 1 << 13;
// Determinant threshold for an admissible resonance matrix.
inline constexpr double resonance_det = 1e-10;

} // namespace kummer::tol
