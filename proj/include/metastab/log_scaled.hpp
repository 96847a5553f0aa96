#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace metastab {

/// A signed real carried as (sign, log magnitude), so that quantities like
/// h e^{-2S/h} survive far below the smallest normal double.
class LogScaled {
public:
    LogScaled() : sign_(0), log_mag_(-std::numeric_limits<double>::infinity()) {}

    static LogScaled from_double(double x) {
        LogScaled v;
        if (x > 0.0) {
            v.sign_ = 1;
            v.log_mag_ = std::log(x);
        } else if (x < 0.0) {
            v.sign_ = -1;
            v.log_mag_ = std::log(-x);
        }
        return v;
    }

    /// sign * e^{log_mag}, with log_mag given directly.
    static LogScaled from_log(int sign, double log_mag) {
        LogScaled v;
        v.sign_ = (sign > 0) ? 1 : (sign < 0 ? -1 : 0);
        v.log_mag_ = v.sign_ == 0 ? -std::numeric_limits<double>::infinity() : log_mag;
        return v;
    }

    static LogScaled zero() { return LogScaled(); }
    static LogScaled one() { return from_log(1, 0.0); }

    int sign() const { return sign_; }
    double log_magnitude() const { return log_mag_; }
    bool is_zero() const { return sign_ == 0; }

    /// Conversion to a plain double; underflows to +-0 / overflows to +-inf
    /// when the exponent leaves the representable range.
    double to_double() const {
        if (sign_ == 0) return 0.0;
        return sign_ * std::exp(log_mag_);
    }

    double log10_magnitude() const { return log_mag_ / std::log(10.0); }

    LogScaled operator*(const LogScaled& o) const {
        if (sign_ == 0 || o.sign_ == 0) return zero();
        return from_log(sign_ * o.sign_, log_mag_ + o.log_mag_);
    }

    LogScaled operator/(const LogScaled& o) const {
        if (sign_ == 0) return zero();
        return from_log(sign_ * o.sign_, log_mag_ - o.log_mag_);
    }

    LogScaled operator-() const { return from_log(-sign_, log_mag_); }

    /// Exact log-sum-exp addition with sign handling.
    LogScaled operator+(const LogScaled& o) const {
        if (sign_ == 0) return o;
        if (o.sign_ == 0) return *this;
        const LogScaled& big = (log_mag_ >= o.log_mag_) ? *this : o;
        const LogScaled& small = (log_mag_ >= o.log_mag_) ? o : *this;
        double delta = small.log_mag_ - big.log_mag_;  // <= 0
        double factor = 1.0 + big.sign_ * small.sign_ * std::exp(delta);
        if (factor <= 0.0) {
            if (factor == 0.0) return zero();
            // cancellation past equality can only happen through roundoff
            return zero();
        }
        return from_log(big.sign_, big.log_mag_ + std::log(factor));
    }

    LogScaled operator-(const LogScaled& o) const { return *this + (-o); }

    LogScaled pow(double e) const {
        if (sign_ == 0) return zero();
        return from_log(sign_ < 0 && std::fmod(e, 2.0) != 0.0 ? -1 : 1, log_mag_ * e);
    }

    bool operator<(const LogScaled& o) const {
        if (sign_ != o.sign_) return sign_ < o.sign_;
        if (sign_ == 0) return false;
        return sign_ > 0 ? log_mag_ < o.log_mag_ : log_mag_ > o.log_mag_;
    }

    /// "s m e d" rendering: sign, mantissa and base-10 exponent, e.g. "3.0333e-04".
    std::string to_string() const {
        if (sign_ == 0) return "0";
        double l10 = log10_magnitude();
        double e = std::floor(l10);
        double mant = std::pow(10.0, l10 - e);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s%.6fe%+04d", sign_ < 0 ? "-" : "", mant,
                      static_cast<int>(e));
        return buf;
    }

private:
    int sign_;
    double log_mag_;
};

}  // namespace metastab
