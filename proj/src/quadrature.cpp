#include "kummer/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "kummer/errors.hpp"
#include "kummer/tridiagonal.hpp"

namespace kummer {

std::shared_ptr<const GaussRule> gauss_laguerre(int n, double alpha) {
    if (n < 1) throw ValidationError("quadrature.nodes", "Gauss-Laguerre rule needs at least one node");
    if (!(alpha > -1.0)) throw ValidationError("quadrature.alpha", "Gauss-Laguerre weight needs alpha > -1");
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::shared_ptr<const GaussRule>> cache;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find({n, alpha});
        if (it != cache.end()) return it->second;
    }
    std::vector<double> diag(n);
    std::vector<double> off(n - 1);
    for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k * (k + alpha));
    const auto eig = tridiagonal_eigen(diag, off, EigenvectorMode::FirstComponents);
    auto rule = std::make_shared<GaussRule>();
    rule->nodes = eig.values;
    rule->weights.resize(n);
    const double mu0 = std::tgamma(alpha + 1.0);
    for (int k = 0; k < n; ++k) rule->weights[k] = mu0 * eig.vectors(0, k) * eig.vectors(0, k);
    std::lock_guard<std::mutex> lock(mutex);
    return cache.emplace(std::make_pair(n, alpha), rule).first->second;
}

double integrate_gk(const std::function<double(double)>& f, double a, double b, double rel_tol, double* error,
                    unsigned max_depth) {
    double err = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &err);
    if (error) *error = err;
    return value;
}

double find_root(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw NumericalError("root.bracket", "root is not bracketed");
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52),
                                                     max_iter);
    return 0.5 * (r.first + r.second);
}

} // namespace kummer
