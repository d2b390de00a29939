#pragma once

#include "quasispec/core.hpp"

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace quasispec {

/// Truncated Chebyshev series on [0,1]: f(x) = sum_k c_k T_k(2x - 1).
class ChebSeries {
public:
    ChebSeries() = default;
    explicit ChebSeries(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {}

    static ChebSeries constant(cplx v) { return ChebSeries({v}); }

    /// Interpolant through `modes` Chebyshev points of the first kind.
    static ChebSeries interpolate(const std::function<cplx(double)>& f, int modes) {
        if (modes < 1)
            throw InputError("Chebyshev interpolation needs at least one mode");
        std::vector<cplx> vals(modes);
        for (int j = 0; j < modes; ++j) {
            double t = std::cos(pi * (j + 0.5) / modes);
            vals[j] = f(0.5 * (t + 1.0));
        }
        std::vector<cplx> c(modes);
        for (int k = 0; k < modes; ++k) {
            cplx s = 0.0;
            for (int j = 0; j < modes; ++j)
                s += vals[j] * std::cos(pi * k * (j + 0.5) / modes);
            c[k] = s * (2.0 / modes);
        }
        c[0] *= 0.5;
        return ChebSeries(std::move(c));
    }

    const std::vector<cplx>& coeffs() const { return c_; }
    int size() const { return static_cast<int>(c_.size()); }
    bool empty() const { return c_.empty(); }

    cplx operator()(double x) const {
        // Clenshaw
        const double t = 2.0 * x - 1.0;
        cplx b1 = 0.0, b2 = 0.0;
        for (int k = size() - 1; k >= 1; --k) {
            cplx b0 = c_[k] + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        return size() == 0 ? cplx(0.0) : c_[0] + t * b1 - b2;
    }

    /// Exact derivative with respect to x.
    ChebSeries derivative() const {
        const int n = size();
        if (n <= 1)
            return ChebSeries({0.0});
        std::vector<cplx> d(n - 1, 0.0);
        for (int k = n - 2; k >= 0; --k)
            d[k] = (k + 2 <= n - 2 ? d[k + 2] : cplx(0.0)) + 2.0 * (k + 1) * c_[k + 1];
        d[0] *= 0.5;
        for (auto& v : d)
            v *= 2.0; // dt/dx
        return ChebSeries(std::move(d));
    }

    friend ChebSeries operator+(const ChebSeries& a, const ChebSeries& b) {
        std::vector<cplx> r(std::max(a.size(), b.size()), 0.0);
        for (int k = 0; k < a.size(); ++k) r[k] += a.c_[k];
        for (int k = 0; k < b.size(); ++k) r[k] += b.c_[k];
        return ChebSeries(std::move(r));
    }

    friend ChebSeries operator-(const ChebSeries& a) {
        std::vector<cplx> r(a.c_);
        for (auto& v : r) v = -v;
        return ChebSeries(std::move(r));
    }

    friend ChebSeries operator-(const ChebSeries& a, const ChebSeries& b) { return a + (-b); }

    friend ChebSeries operator*(cplx s, const ChebSeries& a) {
        std::vector<cplx> r(a.c_);
        for (auto& v : r) v *= s;
        return ChebSeries(std::move(r));
    }

    friend ChebSeries operator*(const ChebSeries& a, const ChebSeries& b) {
        if (a.empty() || b.empty())
            return ChebSeries({0.0});
        // T_i T_j = (T_{i+j} + T_{|i-j|}) / 2
        std::vector<cplx> r(a.size() + b.size() - 1, 0.0);
        for (int i = 0; i < a.size(); ++i)
            for (int j = 0; j < b.size(); ++j) {
                cplx p = 0.5 * a.c_[i] * b.c_[j];
                r[i + j] += p;
                r[std::abs(i - j)] += p;
            }
        return ChebSeries(std::move(r));
    }

    /// The series of the monomial x on [0,1].
    static ChebSeries identity() { return ChebSeries({0.5, 0.5}); }

    /// Power-basis polynomial sum_k a_k x^k converted exactly.
    static ChebSeries from_monomials(const std::vector<cplx>& a) {
        ChebSeries r({0.0});
        ChebSeries xk = constant(1.0);
        for (std::size_t k = 0; k < a.size(); ++k) {
            r = r + a[k] * xk;
            xk = xk * identity();
        }
        return r;
    }

private:
    std::vector<cplx> c_;
};

} // namespace quasispec
