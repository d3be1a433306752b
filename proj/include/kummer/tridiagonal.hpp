#pragma once

#include <vector>

#include <Eigen/Dense>

namespace kummer {

enum class EigenvectorMode { None, FirstComponents, Full };

struct TridiagonalEigen {
    std::vector<double> values;   // ascending
    Eigen::MatrixXd vectors;      // columns are eigenvectors; 1 x n for FirstComponents, empty for None
};

// Implicit QL with Wilkinson-type shifts for the real symmetric tridiagonal matrix with
// the given diagonal and off-diagonal. Throws NumericalError naming the eigenvalue index
// that failed to converge within the iteration cap.
TridiagonalEigen tridiagonal_eigen(const std::vector<double>& diag, const std::vector<double>& off,
                                   EigenvectorMode mode = EigenvectorMode::Full);

} // namespace kummer
