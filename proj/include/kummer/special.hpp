#pragma once

#include <complex>
#include <vector>

namespace kummer {

// Generalized hypergeometric series rFs[a; b; x] summed by term recurrence. Terminating
// series (a nonpositive-integer numerator parameter) are summed exactly; otherwise the
// sum stops once terms fall below rel_tol of the partial sum while decreasing. Throws
// NumericalError for divergent or non-convergent series and ValidationError for a
// nonpositive-integer denominator parameter that is reached before termination.
std::complex<double> hypergeometric_pfq(const std::vector<double>& a, const std::vector<double>& b,
                                        std::complex<double> x, double rel_tol = 1e-17, int max_terms = 200000);

} // namespace kummer
