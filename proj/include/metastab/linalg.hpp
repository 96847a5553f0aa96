#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace metastab::linalg {

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EigenResult {
    Eigen::VectorXcd values;       // unordered unless sorted by caller
    Eigen::MatrixXcd vectors;      // columns; empty when not requested
    double backward_error = 0.0;   // max_i ||Mv_i - lambda_i v_i|| / (||M|| ||v_i||)
};

/// Full nonsymmetric eigendecomposition of a real square matrix.
EigenResult eigen(const Eigen::MatrixXd& M, bool want_vectors);

/// Counts of eigenvalues with Re < -tol, |Re| <= tol, Re > tol.
struct HalfplaneCounts {
    int n_minus = 0;
    int n_axis = 0;
    int n_plus = 0;
};
HalfplaneCounts halfplane_counts(const Eigen::MatrixXd& M, double tol);

/// Whether an eigenvalue of M should be treated as exactly real:
/// |Im lambda| <= 1e-9 (1 + ||M||_F).
bool is_real_eigenvalue(std::complex<double> lambda, const Eigen::MatrixXd& M);

/// D - C A^{-1} B where A is the leading k x k block, via pivoted LU.
/// Throws when the leading block is singular or ill-conditioned past
/// `cond_threshold`.
Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& M, int k,
                                 double cond_threshold = 1e12);
Eigen::MatrixXcd schur_complement(const Eigen::MatrixXcd& M, int k,
                                  double cond_threshold = 1e12);

/// Multi-indices of total degree m in d variables, graded-lexicographic order.
std::vector<std::vector<int>> monomial_basis(int d, int m);

/// Matrix of p -> (Ax) . grad p acting on homogeneous polynomials of degree m,
/// in the graded-lexicographic monomial basis.
Eigen::MatrixXd transport_operator(const Eigen::MatrixXd& A, int m);

double determinant(const Eigen::MatrixXd& M);

/// 1-norm condition estimate from partial-pivoted LU.
double condition_estimate(const Eigen::MatrixXd& M);

}  // namespace metastab::linalg
