#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "metastab/expression.hpp"

namespace metastab {

/// Codomain of a SmoothMap.
enum class Shape { Scalar, Vector, Matrix };

/// A smooth field on R^d valued in R, R^d, or R^{d x d}.
///
/// The body is either an array of Expressions (exactly differentiable) or an
/// opaque callback, in which case derivatives fall back to central finite
/// differences with one Richardson level. Values are immutable after
/// construction and evaluation is reentrant.
class SmoothMap {
public:
    using Callback = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

    SmoothMap() : dim_(0), shape_(Shape::Scalar) {}  // empty placeholder

    static SmoothMap scalar(Expression f, int dim);
    static SmoothMap vector(std::vector<Expression> comps, int dim);
    static SmoothMap matrix(std::vector<Expression> entries_row_major, int dim);

    /// Opaque evaluation callback returning a (rows x cols) matrix; scalar
    /// maps use 1x1, vector maps d x 1.
    static SmoothMap callback(Callback fn, int dim, Shape shape);

    static SmoothMap constant_scalar(double c, int dim);
    static SmoothMap zero_vector(int dim);
    static SmoothMap identity_matrix(int dim);
    static SmoothMap constant_matrix(const Eigen::MatrixXd& M, int dim);

    int dimension() const { return dim_; }
    Shape shape() const { return shape_; }
    bool symbolic() const { return !body_.empty(); }

    double evaluate_scalar(const Eigen::VectorXd& x) const;
    Eigen::VectorXd evaluate_vector(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd evaluate_matrix(const Eigen::VectorXd& x) const;

    /// Gradient of a scalar map.
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    /// Hessian of a scalar map, symmetrized.
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
    /// Jacobian of a vector map (rows: components, cols: variables).
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

    /// Componentwise exact derivative map (symbolic bodies only).
    const Expression& component(int i) const { return body_.at(i); }

private:
    SmoothMap(int dim, Shape shape) : dim_(dim), shape_(shape) {}

    void check_dim(const Eigen::VectorXd& x) const;
    double fd_partial(const std::function<double(const Eigen::VectorXd&)>& g,
                      const Eigen::VectorXd& x, int i) const;

    void build_partials();

    int dim_;
    Shape shape_;
    std::vector<Expression> body_;  // row-major for Matrix
    Callback callback_;
    // symbolic partials built at construction: partials_[i][j] = d body_[i] / d x_j
    std::vector<std::vector<Expression>> partials_;
    std::vector<std::vector<std::vector<Expression>>> second_partials_;
};

}  // namespace metastab
