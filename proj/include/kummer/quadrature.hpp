#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace kummer {

// Nodes and weights of the n-point generalized Gauss-Laguerre rule for the weight
// x^alpha e^{-x} on [0, inf), built by Golub-Welsch on the Laguerre Jacobi matrix.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Rules are cached; the returned object is shared and immutable.
std::shared_ptr<const GaussRule> gauss_laguerre(int n, double alpha);

// Adaptive 15-point Gauss-Kronrod on [a, b] (b may be +inf). Returns the estimate and
// writes the error estimate when requested. The Kronrod error estimate bottoms out near
// 1e-13 relative even for smooth integrands, so tighter requests bisect to max_depth.
double integrate_gk(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                    double* error = nullptr, unsigned max_depth = 15);

// Bracketed root of f on [a, b] (f(a), f(b) of opposite sign) to full double precision.
double find_root(const std::function<double(double)>& f, double a, double b);

} // namespace kummer
