#pragma once

// Integration of Y' = (F(x) + Lambda) Y on [0,1].
//
// The system is integrated in the variable Z = D^{-1} Y exp(-gamma x) with
// D = diag(1, s, ..., s^{n-1}), s = max(1, |lambda|^{1/n}), which keeps the matrix
// entries O(s) and the solution magnitudes O(1). Fixed-mesh classical RK4 is run on
// N and 2N steps; the Richardson difference is the error estimate and the
// extrapolated value is returned. The mesh is doubled until the estimate meets tol.

#include "quasispec/core.hpp"
#include "quasispec/exterior.hpp"
#include "quasispec/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace quasispec {

struct PropagatorOptions {
    double tol = 1e-10;
    int max_steps = 1 << 17;
};

namespace detail {

/// Principal n-th root of lambda.
inline cplx principal_root(cplx lambda, int n) {
    if (lambda == cplx(0.0))
        return 0.0;
    return std::polar(std::pow(std::abs(lambda), 1.0 / n), std::arg(lambda) / n);
}

/// Sum of the m largest Re(rho * omega_k), omega_k^n = 1: the growth rate of an
/// m-fold wedge of free solutions.
inline double growth_rate(cplx lambda, int n, int m) {
    const cplx rho = principal_root(lambda, n);
    std::vector<double> re(n);
    for (int k = 0; k < n; ++k)
        re[k] = (rho * std::polar(1.0, 2.0 * pi * k / n)).real();
    std::sort(re.begin(), re.end(), std::greater<>());
    double g = 0.0;
    for (int k = 0; k < m; ++k)
        g += re[k];
    return g;
}

inline double scale_of(cplx lambda, int n) { return std::max(1.0, std::pow(std::abs(lambda), 1.0 / n)); }

/// D^{-1} (F(x) + Lambda) D.
class ScaledSystem {
public:
    ScaledSystem(const AssociatedMatrix& F, cplx lambda)
        : F_(F), n_(F.order()), lambda_(lambda), s_(scale_of(lambda, F.order())) {
        for (int d = -(max_order - 1); d <= max_order - 1; ++d)
            spow_[d + max_order - 1] = std::pow(s_, d);
    }

    int order() const { return n_; }
    double scale() const { return s_; }

    void operator()(double x, Matrix& A) const {
        F_.evaluate(x, A);
        A(n_ - 1, 0) += lambda_;
        for (int k = 0; k < n_; ++k)
            for (int j = 0; j < n_; ++j)
                if (j != k)
                    A(k, j) *= spow_[j - k + max_order - 1];
    }

private:
    const AssociatedMatrix& F_;
    int n_;
    cplx lambda_;
    double s_;
    double spow_[2 * max_order - 1];
};

/// RK4 with n_per_unit steps per unit length; returns the state at every output point.
template <class MatrixAt>
std::vector<Matrix> rk4_run(const MatrixAt& A_at, const Matrix& Y0, const std::vector<double>& xs,
                            long n_per_unit) {
    std::vector<Matrix> out;
    out.reserve(xs.size());
    Matrix Y = Y0;
    Matrix A0, Am, A1, k1, k2, k3, k4, tmp;
    double x = 0.0;
    A_at(x, A0);
    for (double target : xs) {
        const double len = target - x;
        if (len > 0.0) {
            const long steps = std::max(1L, static_cast<long>(std::ceil(len * n_per_unit)));
            const double h = len / steps;
            for (long i = 0; i < steps; ++i) {
                const double xa = x + i * h;
                const double xb = (i + 1 == steps) ? target : xa + h;
                A_at(xa + 0.5 * h, Am);
                A_at(xb, A1);
                k1.noalias() = A0 * Y;
                tmp = Y + (0.5 * h) * k1;
                k2.noalias() = Am * tmp;
                tmp = Y + (0.5 * h) * k2;
                k3.noalias() = Am * tmp;
                tmp = Y + h * k3;
                k4.noalias() = A1 * tmp;
                Y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                A0.swap(A1);
            }
            x = target;
        }
        out.push_back(Y);
    }
    return out;
}

/// Richardson-controlled integration. Returns extrapolated states at the sorted points xs.
/// Accepts once either the raw fine-mesh estimate or the difference between two
/// successive extrapolations is below tol relative to the solution scale.
template <class MatrixAt>
std::vector<Matrix> integrate(const MatrixAt& A_at, const Matrix& Y0, const std::vector<double>& xs,
                              double stiffness, const PropagatorOptions& opt) {
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] < 0.0 || xs[i] > 1.0 || (i > 0 && xs[i] < xs[i - 1]))
            throw InputError("output points must be sorted and lie in [0,1]");
    long n = std::max(16L, static_cast<long>(std::ceil(2.0 * stiffness)));
    auto coarse = rk4_run(A_at, Y0, xs, n);
    std::vector<Matrix> prev_extrap;
    while (true) {
        auto fine = rk4_run(A_at, Y0, xs, 2 * n);
        std::vector<Matrix> extrap(xs.size());
        double scale = max_abs(Y0), raw = 0.0, ext = 0.0;
        std::size_t worst = 0;
        bool finite = true;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            extrap[i] = (16.0 * fine[i] - coarse[i]) / 15.0;
            if (!fine[i].allFinite() || !coarse[i].allFinite()) {
                finite = false;
                worst = i;
                break;
            }
            scale = std::max(scale, max_abs(fine[i]));
            const double e = max_abs(fine[i] - coarse[i]) / 15.0;
            if (e > raw) {
                raw = e;
                worst = i;
            }
            if (!prev_extrap.empty())
                ext = std::max(ext, max_abs(extrap[i] - prev_extrap[i]));
        }
        if (finite && (raw <= opt.tol * scale || (!prev_extrap.empty() && ext <= opt.tol * scale)))
            return extrap;
        n *= 2;
        if (n > opt.max_steps) {
            const double x = xs.empty() ? 0.0 : xs[worst];
            if (!finite)
                throw IntegrationError("non-finite solution values", x);
            throw IntegrationError("step size underflow: error estimate " + std::to_string(raw / scale) +
                                       " above tolerance",
                                   x);
        }
        coarse = std::move(fine);
        if (finite)
            prev_extrap = std::move(extrap);
        else
            prev_extrap.clear();
    }
}

} // namespace detail

/// Values [C_k^{[j]}(x)] (row j = quasi-derivative order, column k) at requested points.
struct FundamentalSolution {
    cplx lambda;
    int order = 0;
    std::vector<double> x;
    std::vector<Matrix> values;

    const Matrix& at(double xq) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] == xq)
                return values[i];
        throw InputError("point " + std::to_string(xq) + " was not requested");
    }
};

/// Initial matrix C_k^{[j]}(0) = delta_{j, n-k} (1-based k): the anti-diagonal identity.
inline Matrix initial_matrix(int n) {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k)
        m(n - 1 - k, k) = 1.0;
    return m;
}

inline FundamentalSolution fundamental_matrix(const AssociatedMatrix& F, cplx lambda,
                                              const std::vector<double>& x_points,
                                              const PropagatorOptions& opt = {}) {
    if (!(opt.tol > 0.0))
        throw InputError("propagation tolerance must be positive");
    const int n = F.order();
    const detail::ScaledSystem sys(F, lambda);
    const double s = sys.scale();
    const double gamma = detail::growth_rate(lambda, n, 1);

    Matrix Z0 = initial_matrix(n);
    for (int j = 0; j < n; ++j)
        Z0.row(j) /= std::pow(s, j);
    auto shifted = [&](double x, Matrix& A) {
        sys(x, A);
        for (int k = 0; k < n; ++k)
            A(k, k) -= gamma;
    };
    auto Z = detail::integrate(shifted, Z0, x_points, 2.0 * s + std::abs(gamma), opt);

    FundamentalSolution out{lambda, n, x_points, {}};
    for (std::size_t i = 0; i < x_points.size(); ++i) {
        if (x_points[i] == 0.0) {
            out.values.push_back(initial_matrix(n));
            continue;
        }
        Matrix Y = Z[i];
        for (int j = 0; j < n; ++j)
            Y.row(j) *= std::pow(s, j);
        Y *= std::exp(gamma * x_points[i]);
        out.values.push_back(Y);
    }
    return out;
}

/// W[s][r] = V_s(C_r) = C_r^{[n-s]}(1), s, r = 1..n (returned 0-based).
inline Matrix boundary_matrix(const AssociatedMatrix& F, cplx lambda, const PropagatorOptions& opt = {}) {
    const int n = F.order();
    const Matrix C1 = fundamental_matrix(F, lambda, {1.0}, opt).values.front();
    Matrix W(n, n);
    for (int s = 1; s <= n; ++s)
        W.row(s - 1) = C1.row(n - s);
    return W;
}

/// det[V_s(C_{L_t})] for s in `rows` (1-based, in the given order) and each ordered
/// column list L (1-based solution indices), computed by propagating the wedge
/// C_{L_1} ^ ... ^ C_{L_m} through the compound system.
inline std::vector<cplx> boundary_minors(const AssociatedMatrix& F, cplx lambda, const std::vector<int>& rows,
                                         const std::vector<std::vector<int>>& column_lists,
                                         const PropagatorOptions& opt = {}) {
    const int n = F.order();
    const int m = static_cast<int>(rows.size());
    for (const auto& L : column_lists)
        if (static_cast<int>(L.size()) != m)
            throw InputError("column list size does not match the number of boundary rows");
    if (m == 0)
        return std::vector<cplx>(column_lists.size(), 1.0);

    const auto& basis = ExteriorBasis::get(n, m);
    const detail::ScaledSystem sys(F, lambda);
    const double s = sys.scale();
    const double gamma = detail::growth_rate(lambda, n, m);
    const int c = static_cast<int>(column_lists.size());

    Matrix Z0 = Matrix::Zero(basis.dim(), c);
    std::vector<int> exponent(c, 0);
    for (int t = 0; t < c; ++t) {
        std::vector<int> comps;
        for (int r : column_lists[t]) {
            if (r < 1 || r > n)
                throw InputError("solution index out of range");
            comps.push_back(n - r); // C_r(0) = e_{n-r}
            exponent[t] -= n - r;
        }
        Z0.col(t) = basis.basis_wedge(comps);
    }

    std::vector<int> comp_rows;
    for (int sIdx : rows) {
        if (sIdx < 1 || sIdx > n)
            throw InputError("boundary form index out of range");
        comp_rows.push_back(n - sIdx); // V_s reads component n - s
    }
    const int row_sign = permutation_sign(comp_rows);
    if (row_sign == 0)
        throw InputError("repeated boundary form index");
    std::vector<int> I(comp_rows);
    std::sort(I.begin(), I.end());
    int row_exp = 0;
    for (int i : I)
        row_exp += i;
    const int comp = basis.index(I);

    Matrix An;
    auto A_at = [&](double x, Matrix& out) {
        sys(x, An);
        basis.compound(An, out);
        for (int k = 0; k < basis.dim(); ++k)
            out(k, k) -= gamma;
    };
    const auto Z1 = detail::integrate(A_at, Z0, {1.0}, 2.0 * m * s + std::abs(gamma), opt).front();

    std::vector<cplx> out(c);
    const cplx g = std::exp(cplx(gamma));
    for (int t = 0; t < c; ++t)
        out[t] = static_cast<double>(row_sign) * std::pow(s, row_exp + exponent[t]) * g * Z1(comp, t);
    return out;
}

} // namespace quasispec
