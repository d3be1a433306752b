#include "kummer/special.hpp"

#include <cmath>

#include "kummer/errors.hpp"

namespace kummer {

namespace {

bool nonpositive_integer(double v) { return v <= 0.0 && std::nearbyint(v) == v; }

} // namespace

std::complex<double> hypergeometric_pfq(const std::vector<double>& a, const std::vector<double>& b,
                                        std::complex<double> x, double rel_tol, int max_terms) {
    // Index at which the series terminates, if any numerator parameter is -m.
    long terminate_at = -1;
    for (double ai : a)
        if (nonpositive_integer(ai)) {
            const long m = static_cast<long>(-ai);
            if (terminate_at < 0 || m < terminate_at) terminate_at = m;
        }
    for (double bj : b)
        if (nonpositive_integer(bj) && (terminate_at < 0 || static_cast<long>(-bj) < terminate_at))
            throw ValidationError("pfq.parameters", "denominator parameter is a nonpositive integer");
    if (terminate_at < 0) {
        if (a.size() > b.size() + 1 && x != 0.0)
            throw NumericalError("pfq.divergent", "series with more numerator than denominator+1 parameters diverges");
        if (a.size() == b.size() + 1 && std::abs(x) >= 1.0)
            throw NumericalError("pfq.divergent", "argument outside the unit disc of convergence");
    }

    std::complex<double> term = 1.0;
    std::complex<double> sum = 1.0;
    int small_run = 0;
    for (long n = 0; n < max_terms; ++n) {
        if (terminate_at >= 0 && n >= terminate_at) return sum;
        double ratio = 1.0 / (n + 1.0);
        for (double ai : a) ratio *= ai + n;
        for (double bj : b) ratio /= bj + n;
        const std::complex<double> next = term * ratio * x;
        sum += next;
        const bool decreasing = std::abs(next) <= std::abs(term);
        term = next;
        if (term == 0.0) return sum;
        if (terminate_at < 0 && decreasing && std::abs(term) <= rel_tol * std::abs(sum)) {
            if (++small_run >= 3) return sum;
        } else {
            small_run = 0;
        }
    }
    throw NumericalError("pfq.convergence", "hypergeometric series did not converge", std::abs(sum));
}

} // namespace kummer
