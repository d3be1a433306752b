#include "kummer/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kummer/errors.hpp"

namespace kummer {

TridiagonalEigen tridiagonal_eigen(const std::vector<double>& diag, const std::vector<double>& off,
                                   EigenvectorMode mode) {
    const int n = static_cast<int>(diag.size());
    if (n == 0) return {};
    if (static_cast<int>(off.size()) != n - 1)
        throw ValidationError("tridiagonal.shape", "off-diagonal must have one entry fewer than the diagonal");

    std::vector<double> d(diag);
    std::vector<double> e(n, 0.0);
    std::copy(off.begin(), off.end(), e.begin());

    const int rows = mode == EigenvectorMode::Full ? n : (mode == EigenvectorMode::FirstComponents ? 1 : 0);
    Eigen::MatrixXd z = Eigen::MatrixXd::Identity(rows, n);

    const double eps = std::numeric_limits<double>::epsilon();
    const int max_iter = 60;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (iter++ == max_iter)
                throw NumericalError("tridiagonal.convergence",
                                     "QL iteration did not converge for eigenvalue index " + std::to_string(l));
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            int i;
            bool underflow = false;
            for (i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for (int k = 0; k < rows; ++k) {
                    f = z(k, i + 1);
                    z(k, i + 1) = s * z(k, i) + c * f;
                    z(k, i) = c * z(k, i) - s * f;
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    TridiagonalEigen out;
    out.values.resize(n);
    out.vectors.resize(rows, rows ? n : 0);
    for (int j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        if (rows) out.vectors.col(j) = z.col(order[j]);
    }
    return out;
}

} // namespace kummer
