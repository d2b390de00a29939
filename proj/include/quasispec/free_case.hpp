#pragma once

// Closed forms for the free case F = 0, where y^{(n)} = lambda y and
// C_k^{(j)}(x) = (1/n) sum_w (rho w)^{j-(n-k)} e^{rho w x}, rho^n = lambda, w^n = 1.
// Minors of the boundary matrix are expanded over subsets of roots of unity
// (Cauchy-Binet), so each exponential appears once and nothing cancels spuriously.

#include "quasispec/characteristic.hpp"
#include "quasispec/core.hpp"
#include "quasispec/rootfinder.hpp"

#include <cmath>
#include <vector>

namespace quasispec {

namespace detail {

inline void next_subset(std::vector<int>& idx, int n, bool& done) {
    const int m = static_cast<int>(idx.size());
    int i = m - 1;
    while (i >= 0 && idx[i] == n - m + i)
        --i;
    if (i < 0) {
        done = true;
        return;
    }
    ++idx[i];
    for (int j = i + 1; j < m; ++j)
        idx[j] = idx[j - 1] + 1;
}

/// C_k^{(j)}(1) from the power series sum_p lambda^p x^{n-k+pn-j} / (n-k+pn-j)!.
inline cplx free_series_entry(int n, cplx lambda, int j, int k) {
    cplx sum = 0.0;
    int deg = n - k - j;
    cplx lp = 1.0;
    for (int p = 0; p < 400; ++p, deg += n, lp *= lambda) {
        if (deg < 0)
            continue;
        const cplx term = lp / std::tgamma(deg + 1.0);
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum) && p > 2)
            break;
    }
    return sum;
}

} // namespace detail

/// det[V_s(C_r)], s in rows, r in cols (1-based, given order), for the free operator.
inline cplx free_minor(int n, cplx lambda, const std::vector<int>& rows, const std::vector<int>& cols) {
    check_order(n);
    const int m = static_cast<int>(rows.size());
    if (static_cast<int>(cols.size()) != m)
        throw InputError("free minor needs as many rows as columns");
    if (m == 0)
        return 1.0;
    if (std::abs(lambda) < std::pow(2.0, n)) {
        Matrix sub(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                sub(a, b) = detail::free_series_entry(n, lambda, n - rows[a], cols[b]);
        return sub.determinant();
    }
    const cplx rho = detail::principal_root(lambda, n);
    std::vector<cplx> z(n);
    for (int w = 0; w < n; ++w)
        z[w] = rho * std::polar(1.0, 2.0 * pi * w / n);
    // entry(s, r) = sum_w P(s, w) e^{z_w} Q(w, r)
    Matrix P(m, n), Q(n, m);
    for (int a = 0; a < m; ++a)
        for (int w = 0; w < n; ++w)
            P(a, w) = std::pow(z[w], n - rows[a]);
    for (int w = 0; w < n; ++w)
        for (int b = 0; b < m; ++b)
            Q(w, b) = std::pow(z[w], -(n - cols[b])) / static_cast<double>(n);
    cplx total = 0.0;
    std::vector<int> S(m);
    for (int i = 0; i < m; ++i)
        S[i] = i;
    bool done = false;
    while (!done) {
        Matrix Ps(m, m), Qs(m, m);
        cplx ex = 0.0;
        for (int i = 0; i < m; ++i) {
            Ps.col(i) = P.col(S[i]);
            Qs.row(i) = Q.row(S[i]);
            ex += z[S[i]];
        }
        total += Ps.determinant() * Qs.determinant() * std::exp(ex);
        detail::next_subset(S, n, done);
    }
    return total;
}

inline cplx free_char_value(const BoundarySpec& spec, cplx lambda) {
    spec.validate();
    return free_minor(spec.order, lambda, spec.rows(), spec.free_columns());
}

inline cplx free_delta(int n, cplx lambda, int j, int k) {
    std::vector<int> rows;
    for (int s = k + 1; s <= n; ++s)
        rows.push_back(s);
    return free_minor(n, lambda, rows, delta_columns(n, j, k));
}

/// Weyl-Yurko matrix of the free operator.
inline Matrix free_weyl_matrix(int n, cplx lambda) {
    Matrix M = Matrix::Identity(n, n);
    for (int k = 1; k < n; ++k) {
        const cplx dkk = free_delta(n, lambda, k, k);
        if (std::abs(dkk) < near_pole_floor(lambda))
            throw NearPoleError("lambda is too close to a pole of column " + std::to_string(k), k);
        for (int j = k + 1; j <= n; ++j)
            M(j - 1, k - 1) = -free_delta(n, lambda, j, k) / dkk;
    }
    return M;
}

/// First `count` eigenvalues of a designated free-case spectrum (multiplicities expanded).
inline std::vector<cplx> free_eigenvalues(int n, const std::string& name, int count) {
    const auto spec = spectrum_spec(n, name);
    ComplexFunction f = [&](cplx l) { return free_char_value(spec, l); };
    RootOptions ro;
    ro.growth_order = n;
    ro.phase_rate = 2.0 * static_cast<double>(spec.at_one.size());
    const auto rs = find_roots(f, f, plan_search_box(n, count), count, ro, std::max(1.0, std::pow(pi / 2.0, n)));
    std::vector<cplx> out;
    for (const auto& r : rs.roots)
        for (int i = 0; i < r.multiplicity && static_cast<int>(out.size()) < count; ++i)
            out.push_back(r.lambda);
    if (static_cast<int>(out.size()) < count)
        throw NumericalError("fewer than the requested eigenvalues inside the search box");
    return out;
}

} // namespace quasispec
