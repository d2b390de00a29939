#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace quasispec {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr int max_order = 5;
// largest exterior power dimension we ever need: C(5,2) = 10
inline constexpr int max_dim = 10;

using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, max_dim, max_dim>;
using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, max_dim, 1>;

/// Base of everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: wrong order, bad index sets, schema violations.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not deliver a result at the requested accuracy.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double x) : NumericalError(what), x_(x) {}
    double x() const { return x_; }

private:
    double x_;
};

/// Raised when a Weyl-type quotient is requested too close to a zero of its denominator.
class NearPoleError : public NumericalError {
public:
    NearPoleError(const std::string& what, int column) : NumericalError(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

inline void check_order(int n) {
    if (n < 3 || n > max_order)
        throw InputError("unsupported differential order " + std::to_string(n) + " (expected 3, 4 or 5)");
}

inline double max_abs(const Matrix& m) {
    double r = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            r = std::max(r, std::abs(m(i, j)));
    return r;
}

} // namespace quasispec
