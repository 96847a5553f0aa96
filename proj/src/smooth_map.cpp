#include "metastab/smooth_map.hpp"

#include <cmath>
#include <limits>

namespace metastab {

namespace {
const double kFdBase = std::cbrt(std::numeric_limits<double>::epsilon());
// larger step for nested (second-order) differences: roundoff grows as eps/h^2
const double kFdBase2 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
}

SmoothMap SmoothMap::scalar(Expression f, int dim) {
    SmoothMap m(dim, Shape::Scalar);
    m.body_ = {std::move(f)};
    m.build_partials();
    return m;
}

SmoothMap SmoothMap::vector(std::vector<Expression> comps, int dim) {
    if (static_cast<int>(comps.size()) != dim)
        throw EvalError("vector map needs d components");
    SmoothMap m(dim, Shape::Vector);
    m.body_ = std::move(comps);
    m.build_partials();
    return m;
}

SmoothMap SmoothMap::matrix(std::vector<Expression> entries, int dim) {
    if (static_cast<int>(entries.size()) != dim * dim)
        throw EvalError("matrix map needs d*d entries");
    SmoothMap m(dim, Shape::Matrix);
    m.body_ = std::move(entries);
    m.build_partials();
    return m;
}

SmoothMap SmoothMap::callback(Callback fn, int dim, Shape shape) {
    SmoothMap m(dim, shape);
    m.callback_ = std::move(fn);
    return m;
}

SmoothMap SmoothMap::constant_scalar(double c, int dim) {
    return scalar(Expression::constant(c), dim);
}

SmoothMap SmoothMap::zero_vector(int dim) {
    std::vector<Expression> comps(dim, Expression::constant(0.0));
    return vector(std::move(comps), dim);
}

SmoothMap SmoothMap::identity_matrix(int dim) {
    std::vector<Expression> entries;
    entries.reserve(dim * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            entries.push_back(Expression::constant(i == j ? 1.0 : 0.0));
    return matrix(std::move(entries), dim);
}

SmoothMap SmoothMap::constant_matrix(const Eigen::MatrixXd& M, int dim) {
    std::vector<Expression> entries;
    entries.reserve(dim * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) entries.push_back(Expression::constant(M(i, j)));
    return matrix(std::move(entries), dim);
}

void SmoothMap::build_partials() {
    partials_.resize(body_.size());
    second_partials_.resize(body_.size());
    for (size_t k = 0; k < body_.size(); ++k) {
        partials_[k].reserve(dim_);
        for (int i = 0; i < dim_; ++i) partials_[k].push_back(body_[k].derivative(i));
        second_partials_[k].resize(dim_);
        for (int i = 0; i < dim_; ++i) {
            second_partials_[k][i].reserve(dim_);
            for (int j = 0; j < dim_; ++j)
                second_partials_[k][i].push_back(partials_[k][i].derivative(j));
        }
    }
}

void SmoothMap::check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw EvalError("point dimension does not match map dimension");
}

double SmoothMap::evaluate_scalar(const Eigen::VectorXd& x) const {
    check_dim(x);
    if (symbolic()) return body_[0].evaluate(x);
    Eigen::MatrixXd v = callback_(x);
    if (!v.allFinite()) throw EvalError("non-finite callback value");
    return v(0, 0);
}

Eigen::VectorXd SmoothMap::evaluate_vector(const Eigen::VectorXd& x) const {
    check_dim(x);
    if (symbolic()) {
        Eigen::VectorXd v(dim_);
        for (int i = 0; i < dim_; ++i) v[i] = body_[i].evaluate(x);
        return v;
    }
    Eigen::MatrixXd v = callback_(x);
    if (!v.allFinite()) throw EvalError("non-finite callback value");
    return v.col(0);
}

Eigen::MatrixXd SmoothMap::evaluate_matrix(const Eigen::VectorXd& x) const {
    check_dim(x);
    if (symbolic()) {
        Eigen::MatrixXd M(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) M(i, j) = body_[i * dim_ + j].evaluate(x);
        return M;
    }
    Eigen::MatrixXd v = callback_(x);
    if (!v.allFinite()) throw EvalError("non-finite callback value");
    return v;
}

// Central difference with one Richardson extrapolation level:
// D(h/2) + (D(h/2) - D(h)) / 3.
double SmoothMap::fd_partial(const std::function<double(const Eigen::VectorXd&)>& g,
                             const Eigen::VectorXd& x, int i) const {
    double h = kFdBase * (1.0 + std::abs(x[i]));
    Eigen::VectorXd xp = x, xm = x;
    auto central = [&](double step) {
        xp[i] = x[i] + step;
        xm[i] = x[i] - step;
        return (g(xp) - g(xm)) / (2.0 * step);
    };
    double d1 = central(h);
    double d2 = central(h / 2.0);
    double v = d2 + (d2 - d1) / 3.0;
    if (!std::isfinite(v)) throw EvalError("non-finite finite-difference derivative");
    return v;
}

Eigen::VectorXd SmoothMap::gradient(const Eigen::VectorXd& x) const {
    check_dim(x);
    Eigen::VectorXd g(dim_);
    if (symbolic()) {
        for (int i = 0; i < dim_; ++i) g[i] = partials_[0][i].evaluate(x);
        return g;
    }
    auto f = [this](const Eigen::VectorXd& y) { return callback_(y)(0, 0); };
    for (int i = 0; i < dim_; ++i) g[i] = fd_partial(f, x, i);
    return g;
}

Eigen::MatrixXd SmoothMap::hessian(const Eigen::VectorXd& x) const {
    check_dim(x);
    Eigen::MatrixXd H(dim_, dim_);
    if (symbolic()) {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) H(i, j) = second_partials_[0][i][j].evaluate(x);
    } else {
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) {
                auto gj = [this, j](const Eigen::VectorXd& y) {
                    Eigen::VectorXd xp = y, xm = y;
                    double h = kFdBase2 * (1.0 + std::abs(y[j]));
                    xp[j] += h;
                    xm[j] -= h;
                    return (callback_(xp)(0, 0) - callback_(xm)(0, 0)) / (2.0 * h);
                };
                double h = kFdBase2 * (1.0 + std::abs(x[i]));
                Eigen::VectorXd xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                H(i, j) = (gj(xp) - gj(xm)) / (2.0 * h);
            }
        }
    }
    return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd SmoothMap::jacobian(const Eigen::VectorXd& x) const {
    check_dim(x);
    Eigen::MatrixXd J(dim_, dim_);
    if (symbolic()) {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) J(i, j) = partials_[i][j].evaluate(x);
        return J;
    }
    for (int i = 0; i < dim_; ++i) {
        auto fi = [this, i](const Eigen::VectorXd& y) { return callback_(y)(i, 0); };
        for (int j = 0; j < dim_; ++j) J(i, j) = fd_partial(fi, x, j);
    }
    return J;
}

}  // namespace metastab
