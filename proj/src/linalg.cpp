#include "metastab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace metastab::linalg {

EigenResult eigen(const Eigen::MatrixXd& M, bool want_vectors) {
    if (M.rows() != M.cols()) throw LinalgError("eigen: matrix not square");
    if (!M.allFinite()) throw LinalgError("eigen: non-finite entries");
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, want_vectors);
    if (es.info() != Eigen::Success) throw LinalgError("eigen: QR iteration failed to converge");
    EigenResult r;
    r.values = es.eigenvalues();
    if (want_vectors) {
        r.vectors = es.eigenvectors();
        double normM = M.norm();
        double worst = 0.0;
        for (int i = 0; i < r.values.size(); ++i) {
            Eigen::VectorXcd v = r.vectors.col(i);
            double res = (M.cast<std::complex<double>>() * v - r.values[i] * v).norm();
            worst = std::max(worst, res / (std::max(normM, 1e-300) * v.norm()));
        }
        r.backward_error = worst;
    }
    return r;
}

HalfplaneCounts halfplane_counts(const Eigen::MatrixXd& M, double tol) {
    EigenResult r = eigen(M, false);
    HalfplaneCounts c;
    for (int i = 0; i < r.values.size(); ++i) {
        double re = r.values[i].real();
        if (re < -tol)
            ++c.n_minus;
        else if (re > tol)
            ++c.n_plus;
        else
            ++c.n_axis;
    }
    return c;
}

bool is_real_eigenvalue(std::complex<double> lambda, const Eigen::MatrixXd& M) {
    return std::abs(lambda.imag()) <= 1e-9 * (1.0 + M.norm());
}

namespace {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> schur_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M, int k,
    double cond_threshold) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int n = static_cast<int>(M.rows());
    if (M.rows() != M.cols()) throw LinalgError("schur_complement: matrix not square");
    if (k <= 0 || k >= n) throw LinalgError("schur_complement: bad split");
    Mat A = M.topLeftCorner(k, k);
    Eigen::PartialPivLU<Mat> lu(A);
    double amax = A.cwiseAbs().maxCoeff();
    double umin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (umin == 0.0 || amax / umin > cond_threshold)
        throw LinalgError("schur_complement: leading block singular or ill-conditioned");
    return M.bottomRightCorner(n - k, n - k) -
           M.bottomLeftCorner(n - k, k) * lu.solve(M.topRightCorner(k, n - k));
}

}  // namespace

Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& M, int k, double cond_threshold) {
    return schur_impl<double>(M, k, cond_threshold);
}

Eigen::MatrixXcd schur_complement(const Eigen::MatrixXcd& M, int k, double cond_threshold) {
    return schur_impl<std::complex<double>>(M, k, cond_threshold);
}

std::vector<std::vector<int>> monomial_basis(int d, int m) {
    // graded-lex within fixed total degree m: higher power on earlier
    // variables first.
    std::vector<std::vector<int>> basis;
    std::vector<int> gamma(d, 0);
    // recursive enumeration, lexicographically decreasing in gamma
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == d - 1) {
            gamma[pos] = remaining;
            basis.push_back(gamma);
            return;
        }
        for (int g = remaining; g >= 0; --g) {
            gamma[pos] = g;
            rec(pos + 1, remaining - g);
        }
    };
    rec(0, m);
    return basis;
}

Eigen::MatrixXd transport_operator(const Eigen::MatrixXd& A, int m) {
    const int d = static_cast<int>(A.rows());
    if (A.rows() != A.cols()) throw LinalgError("transport_operator: matrix not square");
    if (m < 1) throw LinalgError("transport_operator: degree must be >= 1");
    auto basis = monomial_basis(d, m);
    if (basis.size() > 500) throw LinalgError("transport_operator: basis dimension exceeds 500");

    std::map<std::vector<int>, int> index;
    for (size_t i = 0; i < basis.size(); ++i) index[basis[i]] = static_cast<int>(i);

    const int n = static_cast<int>(basis.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    // (Ax . grad) x^gamma = sum_{i,j} A_{ij} x_j gamma_i x^{gamma - e_i}, so each
    // (i,j) pair contributes gamma_i A_{ij} to the monomial x^{gamma - e_i + e_j}.
    for (int col = 0; col < n; ++col) {
        const auto& gamma = basis[col];
        for (int i = 0; i < d; ++i) {
            if (gamma[i] == 0) continue;
            for (int j = 0; j < d; ++j) {
                if (A(i, j) == 0.0) continue;
                std::vector<int> target = gamma;
                target[i] -= 1;
                target[j] += 1;
                L(index.at(target), col) += gamma[i] * A(i, j);
            }
        }
    }
    return L;
}

double determinant(const Eigen::MatrixXd& M) {
    return Eigen::PartialPivLU<Eigen::MatrixXd>(M).determinant();
}

double condition_estimate(const Eigen::MatrixXd& M) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    double umin = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (umin == 0.0) return std::numeric_limits<double>::infinity();
    return M.cwiseAbs().maxCoeff() / umin;
}

}  // namespace metastab::linalg
