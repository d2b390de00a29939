#pragma once

// Numerical checks of the structural relations satisfied by the Weyl-Yurko matrix.

#include "quasispec/characteristic.hpp"
#include "quasispec/core.hpp"
#include "quasispec/model.hpp"
#include "quasispec/parallel.hpp"
#include "quasispec/rootfinder.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace quasispec {

/// Weyl-Yurko matrix of the star problem: solutions of (-1)^n z^[n] = lambda z with the
/// same forms, built from F* directly.
inline Matrix star_weyl_matrix(const AssociatedMatrix& F, cplx lambda, const PropagatorOptions& opt = {}) {
    const auto Fs = build_star_matrix(F);
    const double sign = F.order() % 2 == 0 ? 1.0 : -1.0;
    return weyl_matrix(Fs, sign * lambda, opt).matrix;
}

/// m_{jk}(lambda) = -Delta_{jk} / Delta_{kk}, one propagation.
inline cplx weyl_entry(const AssociatedMatrix& F, cplx lambda, int j, int k, const PropagatorOptions& opt = {}) {
    const int n = F.order();
    if (!(1 <= k && k <= j && j <= n))
        throw InputError("Weyl entry requires 1 <= k <= j <= n");
    if (j == k)
        return 1.0;
    std::vector<int> rows;
    for (int s = k + 1; s <= n; ++s)
        rows.push_back(s);
    const auto d = boundary_minors(F, lambda, rows, {delta_columns(n, k, k), delta_columns(n, j, k)}, opt);
    return -d[1] / d[0];
}

/// max of |[M*]^T J0 M - J0| and |M*(lambda) - M((-1)^n lambda)|.
inline double check_symplectic(const AssociatedMatrix& F, cplx lambda, const PropagatorOptions& opt = {}) {
    const int n = F.order();
    const auto J = build_sign_matrices(n);
    const Matrix M = weyl_matrix(F, lambda, opt).matrix;
    const Matrix Ms = star_weyl_matrix(F, lambda, opt);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    const Matrix Mneg = weyl_matrix(F, sign * lambda, opt).matrix;
    const double a = max_abs(Ms.transpose() * J.J0 * M - J.J0);
    const double b = max_abs(Ms - Mneg);
    return std::max(a, b);
}

/// Absolute residuals of the order-specific relations between Weyl functions:
/// n=3: m21(-l) = m32(l); n=4: m43 = m21, m42 - m32 m21 + m31 = 0;
/// n=5: m21(-l) = m54(l), m32(-l) = m43(l), m31(-l) - m21(-l) m43(l) + m53(l) = 0.
inline std::vector<double> check_order_relations(const AssociatedMatrix& F, cplx lambda,
                                                 const PropagatorOptions& opt = {}) {
    const int n = F.order();
    const Matrix M = weyl_matrix(F, lambda, opt).matrix;
    auto m = [&](int j, int k) { return M(j - 1, k - 1); };
    switch (n) {
    case 3: {
        const Matrix Mn = weyl_matrix(F, -lambda, opt).matrix;
        return {std::abs(Mn(1, 0) - m(3, 2))};
    }
    case 4:
        return {std::abs(m(4, 3) - m(2, 1)), std::abs(m(4, 2) - m(3, 2) * m(2, 1) + m(3, 1))};
    default: {
        const Matrix Mn = weyl_matrix(F, -lambda, opt).matrix;
        auto mn = [&](int j, int k) { return Mn(j - 1, k - 1); };
        return {std::abs(mn(2, 1) - m(5, 4)), std::abs(mn(3, 2) - m(4, 3)),
                std::abs(mn(3, 1) - mn(2, 1) * m(4, 3) + m(5, 3))};
    }
    }
}

/// Seeded samples from the annulus 1 <= |lambda| <= 50 where M(lambda) and
/// M((-1)^n lambda), M(-lambda) exist and all entries stay below 1e3.
inline std::vector<cplx> sample_lambdas(const AssociatedMatrix& F, int count, unsigned long long seed,
                                        const PropagatorOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radius(1.0, 50.0), angle(-pi, pi);
    std::vector<cplx> out;
    for (int tries = 0; static_cast<int>(out.size()) < count; ++tries) {
        if (tries > 100 * count)
            throw NumericalError("could not sample enough lambdas away from poles");
        const cplx l = std::polar(radius(rng), angle(rng));
        try {
            const Matrix a = weyl_matrix(F, l, opt).matrix;
            const Matrix b = weyl_matrix(F, -l, opt).matrix;
            if (max_abs(a) > 1e3 || max_abs(b) > 1e3)
                continue;
        } catch (const NearPoleError&) {
            continue;
        }
        out.push_back(l);
    }
    return out;
}

struct LaurentReport {
    double residual = 0.0;       // max_i |lhs_i - rhs_i| / max_i |lhs_i|
    int multiplicity = 0;        // measured winding of Delta_kk around lambda0
    double radius = 0.0;
    std::vector<cplx> lhs, rhs;  // indices i = -kappa .. -1
};

/// Laurent form of the n=4 relation m42 = m32 m21 - m31 at a zero lambda0 of Delta_22,
/// or of the n=5 relation m53 = m43 g - m31(-l) with g(l) = m21(-l) at a zero of Delta_33:
///   lhs<i> = sum_{l=-kappa}^{i} a<l> b<i-l>,  i = -kappa..-1.
/// The analytic factor b (m21 or g) is taken from F_alt when given, otherwise from F.
inline LaurentReport check_laurent_convolution(const AssociatedMatrix& F, const AssociatedMatrix* F_alt, cplx lambda0,
                                               int kappa, const PropagatorOptions& opt = {}) {
    const int n = F.order();
    if (n != 4 && n != 5)
        throw InputError("the Laurent convolution relation is stated for orders 4 and 5");
    if (F_alt && F_alt->order() != n)
        throw InputError("comparison problem has a different order");
    if (kappa < 0)
        throw InputError("multiplicity must be nonnegative");
    const AssociatedMatrix& G = F_alt ? *F_alt : F;
    const int k = n == 4 ? 2 : 3;
    const int jl = n == 4 ? 4 : 5, ja = n == 4 ? 3 : 4;
    const double bsign = n == 4 ? 1.0 : -1.0;

    ComplexFunction dkk = [&](cplx l) { return delta(F, l, k, k, opt); };
    ComplexFunction d11 = [&](cplx l) { return delta(G, bsign * l, 1, 1, opt); };
    ComplexFunction lhs_f = [&](cplx l) { return weyl_entry(F, l, jl, k, opt); };
    ComplexFunction a_f = [&](cplx l) { return weyl_entry(F, l, ja, k, opt); };
    ComplexFunction b_f = [&](cplx l) { return weyl_entry(G, bsign * l, 2, 1, opt); };

    LaurentReport rep;
    double r = 0.05 * std::pow(1.0 + std::abs(lambda0), 1.0 - 1.0 / n);
    RootOptions ro;
    ro.quadrature = 32;
    for (int shrink = 0;; ++shrink) {
        detail::PhaseTracker tr(dkk, ro), tb(d11, ro);
        try {
            const int mult = tr.circle_count(lambda0, r, 32);
            const int other = tb.circle_count(lambda0, r, 32);
            if (other == 0) {
                rep.multiplicity = mult;
                break;
            }
        } catch (const BoundaryZero&) {
        }
        if (shrink >= 6)
            throw NumericalError("no pole-free disk found around lambda0");
        r *= 0.5;
    }
    rep.radius = r;
    if (rep.multiplicity != kappa)
        throw NumericalError("stated multiplicity " + std::to_string(kappa) + " but the winding count is " +
                             std::to_string(rep.multiplicity));
    if (kappa == 0)
        return rep;

    const double qtol = 1e-9;
    std::vector<cplx> a(kappa), b(kappa);
    for (int i = -kappa; i <= -1; ++i) {
        rep.lhs.push_back(laurent_coeff(lhs_f, lambda0, i, r, 32, qtol));
        a[i + kappa] = laurent_coeff(a_f, lambda0, i, r, 32, qtol);
    }
    for (int i = 0; i < kappa; ++i)
        b[i] = laurent_coeff(b_f, lambda0, i, r, 32, qtol);
    double scale = 0.0, diff = 0.0;
    for (int i = -kappa; i <= -1; ++i) {
        cplx s = 0.0;
        for (int l = -kappa; l <= i; ++l)
            s += a[l + kappa] * b[i - l];
        rep.rhs.push_back(s);
        scale = std::max(scale, std::abs(rep.lhs[i + kappa]));
        diff = std::max(diff, std::abs(rep.lhs[i + kappa] - s));
    }
    rep.residual = scale > 0.0 ? diff / scale : diff;
    return rep;
}

struct EntireRatioReport {
    std::vector<Root> zeros;                 // zeros of Delta_22 in the box
    std::vector<std::vector<cplx>> singular; // coefficients <-kappa>..<-1> of G1 / Delta_22 per zero
    double max_singular = 0.0;               // max |c<-i>| r^{-i} / max_circle |Delta_11 Delta~_21 / Delta_22|
};

/// Singular parts of (Delta_11 Delta~_21 - Delta~_11 Delta_21) / Delta_22 at the zeros of Delta_22 in box.
inline EntireRatioReport check_entire_ratio(const AssociatedMatrix& F, const AssociatedMatrix& Ft, const Box& box,
                                            const PropagatorOptions& opt = {}) {
    if (F.order() != Ft.order())
        throw InputError("problems of different orders");
    const int n = F.order();
    ComplexFunction d22c = [&](cplx l) { return delta(F, l, 2, 2, {std::max(opt.tol, 1e-6)}); };
    ComplexFunction d22 = [&](cplx l) { return delta(F, l, 2, 2, opt); };
    RootOptions ro;
    ro.growth_order = n;
    ro.phase_rate = 2.0 * (n - 2);
    EntireRatioReport rep;
    rep.zeros = find_roots(d22c, d22, box, 0, ro).roots;

    auto deltas = [&](const AssociatedMatrix& A, cplx l) {
        std::vector<int> rows;
        for (int s = 2; s <= n; ++s)
            rows.push_back(s);
        return boundary_minors(A, l, rows, {delta_columns(n, 1, 1), delta_columns(n, 2, 1)}, opt);
    };
    for (const auto& z : rep.zeros) {
        const double r = 0.05 * std::pow(1.0 + std::abs(z.lambda), 1.0 - 1.0 / n);
        double term_scale = 0.0;
        ComplexFunction K = [&](cplx l) {
            const auto a = deltas(F, l), b = deltas(Ft, l);
            const cplx d = d22(l);
            term_scale = std::max(term_scale, std::abs(a[0] * b[1] / d));
            return (a[0] * b[1] - b[0] * a[1]) / d;
        };
        std::vector<cplx> c;
        double worst = 0.0;
        for (int i = -z.multiplicity; i <= -1; ++i)
            c.push_back(laurent_coeff(K, z.lambda, i, r, 32, 1e-9));
        for (int i = -z.multiplicity; i <= -1; ++i)
            if (term_scale > 0.0)
                worst = std::max(worst, std::abs(c[i + z.multiplicity]) * std::pow(r, i) / term_scale);
        rep.singular.push_back(std::move(c));
        rep.max_singular = std::max(rep.max_singular, worst);
    }
    return rep;
}

/// P(x, lambda) = Phi(x, lambda) Phi~(x, lambda)^{-1}: max over lambda pairs of the largest
/// entrywise difference over x, plus max over lambda of |P(0, lambda) - I|.
inline double check_P_matrix(const AssociatedMatrix& F, const AssociatedMatrix& Ft, const std::vector<cplx>& lambdas,
                             const std::vector<double>& x_points, const PropagatorOptions& opt = {}) {
    if (F.order() != Ft.order())
        throw InputError("problems of different orders");
    const int n = F.order();
    std::vector<double> xs(x_points);
    if (std::find(xs.begin(), xs.end(), 0.0) == xs.end())
        xs.insert(xs.begin(), 0.0);
    std::sort(xs.begin(), xs.end());
    std::vector<std::vector<Matrix>> P(lambdas.size());
    parallel_for(static_cast<int>(lambdas.size()), [&](int i) {
        const auto Phi = phi_matrix(F, lambdas[i], xs, opt);
        const auto Phit = phi_matrix(Ft, lambdas[i], xs, opt);
        for (std::size_t t = 0; t < xs.size(); ++t) {
            Eigen::FullPivLU<Matrix> lu(Phit[t]);
            if (!lu.isInvertible())
                throw NumericalError("singular Phi~ at x = " + std::to_string(xs[t]));
            P[i].push_back(Phi[t] * lu.inverse());
        }
    });
    double res = 0.0, at0 = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        at0 = std::max(at0, max_abs(P[i][0] - Matrix::Identity(n, n)));
        for (std::size_t j = i + 1; j < lambdas.size(); ++j)
            for (std::size_t t = 0; t < xs.size(); ++t)
                res = std::max(res, max_abs(P[i][t] - P[j][t]));
    }
    return res + at0;
}

struct SeparationReport {
    double min_distance = std::numeric_limits<double>::infinity();
    bool violation = false;
};

inline SeparationReport check_separation(const std::vector<std::pair<Spectrum, Spectrum>>& pairs, double tol = 1e-6) {
    SeparationReport rep;
    for (const auto& [a, b] : pairs)
        for (const auto& x : a.eigenvalues)
            for (const auto& y : b.eigenvalues)
                rep.min_distance = std::min(rep.min_distance, std::abs(x.lambda - y.lambda));
    rep.violation = rep.min_distance <= tol;
    return rep;
}

/// Zeros of Delta_{m,m} in box.
inline Spectrum delta_zeros(const AssociatedMatrix& F, int m, const Box& box, const SpectrumOptions& opt = {}) {
    const int n = F.order();
    if (m < 1 || m >= n)
        throw InputError("Delta_{m,m} has zeros only for 1 <= m < n");
    return find_spectrum(F, delta_problem(n, m, m), box, 0, opt);
}

/// Pairs (zeros of Delta_mm, zeros of Delta_{m+1,m+1}), m = 1..n-2, over a common box.
inline std::vector<std::pair<Spectrum, Spectrum>> separation_pairs(const AssociatedMatrix& F, const Box& box,
                                                                   const SpectrumOptions& opt = {}) {
    const int n = F.order();
    std::vector<Spectrum> z;
    for (int m = 1; m < n; ++m)
        z.push_back(delta_zeros(F, m, box, opt));
    std::vector<std::pair<Spectrum, Spectrum>> out;
    for (int m = 0; m + 1 < static_cast<int>(z.size()); ++m)
        out.emplace_back(z[m], z[m + 1]);
    return out;
}

struct CheckRecord {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool lower_is_better = true; // separation passes when value > threshold
    bool passed = false;
    std::string detail;
};

struct VerificationOptions {
    unsigned long long seed = 1;
    int lambda_samples = 20;
    PropagatorOptions propagation{1e-12};
};

inline const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"structure",    "symplectic", "order_relations", "laurent",
                                                "entire_ratio", "P_matrix",   "separation"};
    return names;
}

/// Runs the named checks on cs (and on the pair (cs, other) where a second problem is used).
inline std::vector<CheckRecord> run_verification(const CoefficientSet& cs, const CoefficientSet* other,
                                                 const std::vector<std::string>& checks,
                                                 const VerificationOptions& opt = {}) {
    for (const auto& c : checks)
        if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
            throw InputError("unknown check '" + c + "'");
    if (other && other->order() != cs.order())
        throw InputError("the two problems have different orders");
    const int n = cs.order();
    const auto F = build_associated_matrix(cs);
    const auto F2 = build_associated_matrix(other ? *other : cs);
    const auto& po = opt.propagation;
    std::vector<cplx> lambdas;
    auto need_lambdas = [&] {
        if (lambdas.empty())
            lambdas = sample_lambdas(F, opt.lambda_samples, opt.seed, po);
    };
    auto fmt = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.3e", v);
        return std::string(b);
    };

    std::vector<CheckRecord> out;
    for (const auto& name : checks) {
        CheckRecord rec;
        rec.name = name;
        if (name == "structure") {
            validate_structure(F);
            const auto Fs = build_star_matrix(F);
            double d = 0.0;
            for (int i = 0; i <= 16; ++i)
                d = std::max(d, max_abs(Fs(i / 16.0) - F(i / 16.0)));
            rec.value = d;
            rec.threshold = 1e-12;
            rec.detail = "class structure valid; max |F* - F| over 17 points";
        } else if (name == "symplectic" || name == "order_relations") {
            need_lambdas();
            std::vector<double> r(lambdas.size(), 0.0);
            parallel_for(static_cast<int>(lambdas.size()), [&](int i) {
                if (name == "symplectic") {
                    r[i] = check_symplectic(F, lambdas[i], po);
                } else {
                    for (double v : check_order_relations(F, lambdas[i], po))
                        r[i] = std::max(r[i], v);
                }
            });
            rec.value = *std::max_element(r.begin(), r.end());
            rec.threshold = 1e-7;
            rec.detail = "max over " + std::to_string(lambdas.size()) + " seeded lambdas in 1 <= |lambda| <= 50";
        } else if (name == "laurent") {
            if (n == 3) {
                rec.detail = "not applicable for order 3";
                rec.threshold = 1e-5;
                rec.passed = true;
                out.push_back(rec);
                continue;
            }
            const int k = n == 4 ? 2 : 3;
            SpectrumOptions so;
            so.tol = po.tol;
            const auto z = find_spectrum(F, delta_problem(n, k, k), plan_search_box(n, 1), 1, so);
            if (z.eigenvalues.empty())
                throw NumericalError("no zero of Delta_kk found for the Laurent check");
            const auto& l0 = z.eigenvalues.front();
            const auto rep = check_laurent_convolution(F, other ? &F2 : nullptr, l0.lambda, l0.multiplicity, po);
            rec.value = rep.residual;
            rec.threshold = 1e-5;
            rec.detail = "at the zero " + fmt(l0.lambda.real()) + (l0.lambda.imag() < 0 ? "" : "+") +
                         fmt(l0.lambda.imag()) + "i of Delta_" + std::to_string(k) + std::to_string(k) +
                         ", multiplicity " + std::to_string(l0.multiplicity);
        } else if (name == "entire_ratio") {
            const auto rep = check_entire_ratio(F, F2, plan_search_box(n, 1), po);
            rec.value = rep.max_singular;
            rec.threshold = 1e-6;
            rec.detail = std::to_string(rep.zeros.size()) + " zeros of Delta_22 in the planned box";
        } else if (name == "P_matrix") {
            need_lambdas();
            const std::vector<cplx> ls(lambdas.begin(), lambdas.begin() + std::min<std::size_t>(3, lambdas.size()));
            rec.value = check_P_matrix(F, F2, ls, {0.25, 0.5, 0.75, 1.0}, po);
            rec.threshold = 1e-6;
            rec.detail = "3 lambdas, x in {0, 0.25, 0.5, 0.75, 1}";
        } else if (name == "separation") {
            SpectrumOptions so;
            so.tol = po.tol;
            const auto rep = check_separation(separation_pairs(F, plan_search_box(n, 1), so));
            rec.value = rep.min_distance;
            rec.threshold = 1e-6;
            rec.lower_is_better = false;
            rec.detail = "consecutive Delta_mm zero sets in the planned box";
        }
        rec.passed = rec.lower_is_better ? rec.value <= rec.threshold : rec.value > rec.threshold;
        out.push_back(rec);
    }
    return out;
}

} // namespace quasispec
