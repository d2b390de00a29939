#pragma once

// Characteristic determinants, the Weyl-Yurko matrix and Weyl solutions for the
// forms U_s(y) = y^[n-s](0), V_s(y) = y^[n-s](1).

#include "quasispec/core.hpp"
#include "quasispec/model.hpp"
#include "quasispec/propagator.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace quasispec {

/// Forms U_s, s in at_zero, and V_s, s in at_one, set to zero.
struct BoundarySpec {
    int order = 0;
    std::vector<int> at_zero;
    std::vector<int> at_one;

    void validate() const {
        check_order(order);
        if (static_cast<int>(at_zero.size() + at_one.size()) != order)
            throw InputError("boundary spec must impose exactly n = " + std::to_string(order) + " conditions");
        for (const auto* set : {&at_zero, &at_one}) {
            std::set<int> seen;
            for (int s : *set) {
                if (s < 1 || s > order)
                    throw InputError("boundary form index " + std::to_string(s) + " out of range");
                if (!seen.insert(s).second)
                    throw InputError("boundary form index " + std::to_string(s) + " repeated");
            }
        }
    }

    /// Solution indices r not in at_zero, increasing: the columns of the characteristic minor.
    std::vector<int> free_columns() const {
        std::vector<int> cols;
        for (int r = 1; r <= order; ++r)
            if (std::find(at_zero.begin(), at_zero.end(), r) == at_zero.end())
                cols.push_back(r);
        return cols;
    }

    std::vector<int> rows() const {
        std::vector<int> r(at_one);
        std::sort(r.begin(), r.end());
        return r;
    }

    friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

/// Names of the designated spectra per order.
inline const std::vector<std::string>& spectrum_names(int order) {
    static const std::vector<std::string> n3{"S1", "S2"}, n4{"S12", "S13", "S23"}, n5{"S123", "S124", "S125"};
    check_order(order);
    return order == 3 ? n3 : order == 4 ? n4 : n5;
}

/// S_i (n=3): U_i = 0, V_2 = V_3 = 0; S_ij (n=4): U_i = U_j = 0, V_3 = V_4 = 0;
/// S_hij (n=5): U_h = U_i = U_j = 0, V_4 = V_5 = 0.
inline BoundarySpec spectrum_spec(int order, const std::string& name) {
    const auto& names = spectrum_names(order);
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw InputError("unknown spectrum '" + name + "' for order " + std::to_string(order));
    BoundarySpec b{order, {}, {}};
    for (std::size_t i = 1; i < name.size(); ++i)
        b.at_zero.push_back(name[i] - '0');
    for (int s = static_cast<int>(b.at_zero.size()) + 1; s <= order; ++s)
        b.at_one.push_back(s);
    b.validate();
    return b;
}

/// det of W restricted to rows at_one and columns {1..n} \ at_zero, both increasing.
inline cplx char_function(const Matrix& W, const BoundarySpec& spec) {
    spec.validate();
    if (W.rows() != spec.order || W.cols() != spec.order)
        throw InputError("boundary matrix size does not match the boundary spec");
    const auto rows = spec.rows();
    const auto cols = spec.free_columns();
    const int m = static_cast<int>(rows.size());
    if (m == 0)
        return 1.0;
    Matrix sub(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            sub(a, b) = W(rows[a] - 1, cols[b] - 1);
    return sub.determinant();
}

/// Same value as char_function(boundary_matrix(F, lambda), spec), via wedge propagation.
inline cplx char_value(const AssociatedMatrix& F, cplx lambda, const BoundarySpec& spec,
                       const PropagatorOptions& opt = {}) {
    spec.validate();
    if (spec.order != F.order())
        throw InputError("boundary spec order does not match the associated matrix");
    return boundary_minors(F, lambda, spec.rows(), {spec.free_columns()}, opt).front();
}

/// Columns of Delta_{j,k}: C_{k+1}, ..., C_n with C_j replaced in place by C_k.
inline std::vector<int> delta_columns(int n, int j, int k) {
    if (!(1 <= k && k <= j && j <= n))
        throw InputError("delta requires 1 <= k <= j <= n");
    std::vector<int> cols;
    for (int r = k + 1; r <= n; ++r)
        cols.push_back(r == j ? k : r);
    return cols;
}

/// Problem whose characteristic minor is Delta_{j,k} up to sign: U_xi = 0 for
/// xi in {1..k-1} and xi = j, V_eta = 0 for eta in {k+1..n}.
inline BoundarySpec delta_problem(int n, int j, int k) {
    BoundarySpec b{n, {}, {}};
    for (int xi = 1; xi < k; ++xi)
        b.at_zero.push_back(xi);
    b.at_zero.push_back(j);
    for (int eta = k + 1; eta <= n; ++eta)
        b.at_one.push_back(eta);
    b.validate();
    return b;
}

/// Delta_{j,k} = sign * char_function(delta_problem(n, j, k)); the sign accounts for the
/// in-place column replacement.
inline int delta_sign(int n, int j, int k) { return permutation_sign(delta_columns(n, j, k)); }

inline cplx delta(const AssociatedMatrix& F, cplx lambda, int j, int k, const PropagatorOptions& opt = {}) {
    const int n = F.order();
    std::vector<int> rows;
    for (int s = k + 1; s <= n; ++s)
        rows.push_back(s);
    return boundary_minors(F, lambda, rows, {delta_columns(n, j, k)}, opt).front();
}

/// Pole floor for Delta_{k,k}.
inline double near_pole_floor(cplx lambda) { return 1e-12 * (1.0 + std::abs(lambda)); }

struct WeylSample {
    cplx lambda;
    Matrix matrix;  // M(lambda), unit lower-triangular
    Matrix deltas;  // Delta_{j,k} for j >= k, zero above the diagonal
};

inline WeylSample weyl_matrix(const AssociatedMatrix& F, cplx lambda, const PropagatorOptions& opt = {}) {
    const int n = F.order();
    WeylSample w{lambda, Matrix::Identity(n, n), Matrix::Zero(n, n)};
    w.deltas(n - 1, n - 1) = 1.0;
    for (int k = 1; k < n; ++k) {
        std::vector<int> rows;
        for (int s = k + 1; s <= n; ++s)
            rows.push_back(s);
        std::vector<std::vector<int>> lists;
        for (int j = k; j <= n; ++j)
            lists.push_back(delta_columns(n, j, k));
        const auto d = boundary_minors(F, lambda, rows, lists, opt);
        for (int j = k; j <= n; ++j)
            w.deltas(j - 1, k - 1) = d[j - k];
        if (std::abs(d[0]) < near_pole_floor(lambda))
            throw NearPoleError("lambda is too close to a zero of Delta_{" + std::to_string(k) + "," +
                                    std::to_string(k) + "} (pole of column " + std::to_string(k) + ")",
                                k);
        for (int j = k + 1; j <= n; ++j)
            w.matrix(j - 1, k - 1) = -d[j - k] / d[0];
    }
    return w;
}

/// Vector (Phi_k^{[0]}, ..., Phi_k^{[n-1]}) at each x, from
/// Phi_k = det[C_nu(x); V_{k+1}(C_nu); ...; V_n(C_nu)]_{nu=k..n} / Delta_{k,k}.
inline std::vector<Vector> phi_solution(const AssociatedMatrix& F, cplx lambda, int k,
                                        const std::vector<double>& x_points,
                                        const PropagatorOptions& opt = {}) {
    const int n = F.order();
    if (k < 1 || k > n)
        throw InputError("Weyl solution index out of range");
    std::vector<double> xs(x_points);
    const bool has_one = std::find(xs.begin(), xs.end(), 1.0) != xs.end();
    if (!has_one)
        xs.push_back(1.0);
    const auto fs = fundamental_matrix(F, lambda, xs, opt);
    const Matrix& C1 = fs.values.back();
    const int m = n - k; // rows V_{k+1..n}
    Matrix V(m, m + 1);
    for (int a = 0; a < m; ++a)
        for (int nu = k; nu <= n; ++nu)
            V(a, nu - k) = C1(n - (k + 1 + a), nu - 1);
    cplx dkk = 1.0;
    if (m > 0)
        dkk = V.rightCols(m).determinant();
    if (std::abs(dkk) < near_pole_floor(lambda))
        throw NearPoleError("lambda is too close to a zero of Delta_{" + std::to_string(k) + "," +
                                std::to_string(k) + "}",
                            k);
    std::vector<Vector> out;
    for (std::size_t i = 0; i < x_points.size(); ++i) {
        const Matrix& C = fs.values[i];
        Vector phi(n);
        for (int q = 0; q < n; ++q) {
            Matrix D(m + 1, m + 1);
            for (int nu = k; nu <= n; ++nu)
                D(0, nu - k) = C(q, nu - 1);
            if (m > 0)
                D.bottomRows(m) = V;
            phi(q) = D.determinant() / dkk;
        }
        out.push_back(phi);
    }
    return out;
}

/// Phi(x, lambda) = C(x, lambda) M(lambda) at each point.
inline std::vector<Matrix> phi_matrix(const AssociatedMatrix& F, cplx lambda, const std::vector<double>& x_points,
                                      const PropagatorOptions& opt = {}) {
    const auto M = weyl_matrix(F, lambda, opt).matrix;
    const auto fs = fundamental_matrix(F, lambda, x_points, opt);
    std::vector<Matrix> out;
    for (const auto& C : fs.values)
        out.push_back(C * M);
    return out;
}

struct SignMatrices {
    Matrix J0, J1, J;
};

/// J_a[k][n-k+1] = (-1)^{n-k} (forms with p_{s,a} = n - s), J[k][n-k+1] = (-1)^{k+1}.
inline SignMatrices build_sign_matrices(int n) {
    check_order(n);
    SignMatrices s{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (int k = 1; k <= n; ++k) {
        const double ja = ((n - k) % 2 == 0) ? 1.0 : -1.0;
        const double j = ((k + 1) % 2 == 0) ? 1.0 : -1.0;
        s.J0(k - 1, n - k) = ja;
        s.J1(k - 1, n - k) = ja;
        s.J(k - 1, n - k) = j;
    }
    return s;
}

} // namespace quasispec
