#pragma once

// Coefficient sets of the three operator families and their associated matrices.
//
//   n = 3:  y''' + (p y)' + p y'                         unknown: p
//   n = 4:  y'''' - (p y')' + q y,  tau1' = p, tau2'' = q   unknowns: tau1, tau2
//   n = 5:  y^(5) + (p y'')' + (p y')'' + (q y)' + q y',
//           sigma0 = p, -sigma1' = q                      unknowns: sigma0, sigma1
//
// The associated matrix F(x) turns l_n(y) = lambda y into Y' = (F + Lambda) Y with
// Y = (y^[0], ..., y^[n-1]) the quasi-derivatives.

#include "quasispec/chebyshev.hpp"
#include "quasispec/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace quasispec {

enum class Representation { chebyshev, grid };

struct CoefficientFunction {
    ChebSeries series;
    Representation origin = Representation::chebyshev;
    // only meaningful when origin == grid
    std::vector<cplx> samples;
    int degree = 1;
};

/// Uniform samples on [0,1] evaluated by local Lagrange interpolation of the given degree.
inline cplx grid_interpolate(const std::vector<cplx>& s, int degree, double x) {
    const int m = static_cast<int>(s.size());
    if (m == 1)
        return s[0];
    degree = std::clamp(degree, 1, m - 1);
    const double h = 1.0 / (m - 1);
    int first = static_cast<int>(std::floor(x / h)) - (degree - 1) / 2;
    first = std::clamp(first, 0, m - 1 - degree);
    cplx r = 0.0;
    for (int i = first; i <= first + degree; ++i) {
        double w = 1.0;
        for (int j = first; j <= first + degree; ++j)
            if (j != i)
                w *= (x - j * h) / ((i - j) * h);
        r += w * s[i];
    }
    return r;
}

inline CoefficientFunction from_chebyshev(std::vector<cplx> coeffs) {
    if (coeffs.empty())
        throw InputError("empty Chebyshev coefficient list");
    return {ChebSeries(std::move(coeffs)), Representation::chebyshev, {}, 1};
}

/// Grid samples are converted to a Chebyshev interpolant of the piecewise interpolant.
inline CoefficientFunction from_grid(std::vector<cplx> samples, int degree = 1) {
    if (samples.size() < 2)
        throw InputError("grid representation needs at least two samples");
    if (degree < 1)
        throw InputError("grid interpolation degree must be positive");
    const int modes = std::clamp(2 * static_cast<int>(samples.size()) + 1, 33, 257);
    auto series = ChebSeries::interpolate(
        [&](double x) { return grid_interpolate(samples, degree, x); }, modes);
    return {std::move(series), Representation::grid, std::move(samples), degree};
}

inline const std::vector<std::string>& function_names(int order) {
    static const std::array<std::vector<std::string>, 3> names = {
        std::vector<std::string>{"p"},
        std::vector<std::string>{"tau1", "tau2"},
        std::vector<std::string>{"sigma0", "sigma1"},
    };
    check_order(order);
    return names[order - 3];
}

/// The unknown functions of one operator family. Immutable after construction.
class CoefficientSet {
public:
    CoefficientSet(int order, std::map<std::string, CoefficientFunction> functions)
        : order_(order), fns_(std::move(functions)) {
        const auto& names = function_names(order_);
        if (fns_.size() != names.size())
            throw InputError("order " + std::to_string(order_) + " expects " +
                             std::to_string(names.size()) + " coefficient function(s)");
        for (const auto& nm : names)
            if (!fns_.count(nm))
                throw InputError("order " + std::to_string(order_) + " requires function '" + nm + "'");
    }

    static CoefficientSet zero(int order) {
        std::map<std::string, CoefficientFunction> f;
        for (const auto& nm : function_names(order))
            f[nm] = from_chebyshev({0.0});
        return CoefficientSet(order, std::move(f));
    }

    /// Builds a set from plain Chebyshev coefficient lists, in function_names() order.
    static CoefficientSet chebyshev(int order, const std::vector<std::vector<cplx>>& coeffs) {
        const auto& names = function_names(order);
        if (coeffs.size() != names.size())
            throw InputError("wrong number of coefficient lists for order " + std::to_string(order));
        std::map<std::string, CoefficientFunction> f;
        for (std::size_t i = 0; i < names.size(); ++i)
            f[names[i]] = from_chebyshev(coeffs[i]);
        return CoefficientSet(order, std::move(f));
    }

    int order() const { return order_; }
    const std::map<std::string, CoefficientFunction>& functions() const { return fns_; }
    const ChebSeries& operator[](const std::string& name) const { return fn(name).series; }

    const CoefficientFunction& fn(const std::string& name) const {
        auto it = fns_.find(name);
        if (it == fns_.end())
            throw InputError("no coefficient function named '" + name + "'");
        return it->second;
    }

    /// True when every function was given as a Chebyshev series.
    bool smooth() const {
        for (const auto& [_, f] : fns_)
            if (f.origin != Representation::chebyshev)
                return false;
        return true;
    }

    /// tau2 is fixed up to c*x; the canonical representative has tau2(1) = tau2(0).
    double gauge_defect() const {
        if (order_ != 4)
            return 0.0;
        const auto& t2 = (*this)["tau2"];
        return std::abs(t2(1.0) - t2(0.0));
    }

    bool canonical(double tol = 1e-12) const { return gauge_defect() <= tol; }

    /// Same set with tau2 replaced by tau2 + c x.
    CoefficientSet gauge_shifted(cplx c) const {
        if (order_ != 4)
            throw InputError("the c*x gauge only exists for order 4");
        auto f = fns_;
        auto& t2 = f.at("tau2");
        t2 = {t2.series + c * ChebSeries::identity(), Representation::chebyshev, {}, 1};
        return CoefficientSet(order_, std::move(f));
    }

    CoefficientSet canonicalized() const {
        if (order_ != 4)
            return *this;
        const auto& t2 = (*this)["tau2"];
        return gauge_shifted(-(t2(1.0) - t2(0.0)));
    }

private:
    int order_;
    std::map<std::string, CoefficientFunction> fns_;
};

/// Evaluable n x n matrix function F(x) of the class with ones on the superdiagonal,
/// zeros above it and zero trace.
class AssociatedMatrix {
public:
    using Fill = std::function<void(double, Matrix&)>;

    AssociatedMatrix(int order, Fill fill) : n_(order), fill_(std::move(fill)) {}

    int order() const { return n_; }

    void evaluate(double x, Matrix& out) const {
        out.setZero(n_, n_);
        fill_(x, out);
    }

    Matrix operator()(double x) const {
        Matrix m;
        evaluate(x, m);
        return m;
    }

private:
    int n_;
    Fill fill_;
};

/// Symbolic entries f_{k,j} (0-based) of the displayed associated matrix, as series.
/// Entries not listed are structural (superdiagonal ones, zeros elsewhere).
struct EntrySeries {
    int row, col;
    ChebSeries value;
};

inline std::vector<EntrySeries> associated_entries(const CoefficientSet& cs) {
    switch (cs.order()) {
    case 3: {
        const auto& p = cs["p"];
        return {{1, 0, -p}, {2, 1, -p}};
    }
    case 4: {
        const auto& t1 = cs["tau1"];
        const auto& t2 = cs["tau2"];
        return {
            {1, 0, -t2},
            {1, 1, t1},
            {2, 0, t1 * t2},
            {2, 1, -(t1 * t1) + 2.0 * t2},
            {2, 2, -t1},
            {3, 0, t2 * t2},
            {3, 1, -(t1 * t2)},
            {3, 2, -t2},
        };
    }
    case 5: {
        const auto& s0 = cs["sigma0"];
        const auto& s1 = cs["sigma1"];
        return {{2, 0, s1}, {2, 1, -s0}, {3, 2, -s0}, {4, 2, -s1}};
    }
    default:
        check_order(cs.order());
        return {};
    }
}

inline AssociatedMatrix build_associated_matrix(const CoefficientSet& cs) {
    const int n = cs.order();
    auto entries = std::make_shared<const std::vector<EntrySeries>>(associated_entries(cs));
    return AssociatedMatrix(n, [n, entries](double x, Matrix& out) {
        for (int k = 0; k + 1 < n; ++k)
            out(k, k + 1) = 1.0;
        for (const auto& e : *entries)
            out(e.row, e.col) = e.value(x);
    });
}

/// Throws InputError unless F has the required structure at every sample point.
inline void validate_structure(const AssociatedMatrix& F, int samples = 9) {
    const int n = F.order();
    for (int s = 0; s < samples; ++s) {
        const double x = samples == 1 ? 0.5 : static_cast<double>(s) / (samples - 1);
        const Matrix m = F(x);
        cplx tr = 0.0;
        double scale = 1.0;
        for (int k = 0; k < n; ++k) {
            tr += m(k, k);
            scale = std::max(scale, std::abs(m(k, k)));
            for (int j = k + 1; j < n; ++j) {
                const cplx want = (j == k + 1) ? cplx(1.0) : cplx(0.0);
                if (m(k, j) != want)
                    throw InputError("associated matrix violates the upper structure at (" +
                                     std::to_string(k + 1) + "," + std::to_string(j + 1) + ")");
            }
        }
        if (std::abs(tr) > 1e-12 * scale)
            throw InputError("associated matrix has nonzero trace at x = " + std::to_string(x));
    }
}

/// f*_{k,j} = (-1)^{k+j+1} f_{n-j+1, n-k+1}.
inline AssociatedMatrix build_star_matrix(const AssociatedMatrix& F) {
    validate_structure(F);
    const int n = F.order();
    return AssociatedMatrix(n, [F, n](double x, Matrix& out) {
        Matrix a;
        F.evaluate(x, a);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const double sign = ((k + j + 1) % 2 == 0) ? 1.0 : -1.0;
                out(k, j) = sign * a(n - 1 - j, n - 1 - k);
            }
    });
}

/// Classical (symbolic) evaluation of l_n(y) for smooth coefficients.
inline ChebSeries classical_expression(const CoefficientSet& cs, const ChebSeries& y) {
    auto d = [](const ChebSeries& f, int k) {
        ChebSeries r = f;
        for (int i = 0; i < k; ++i)
            r = r.derivative();
        return r;
    };
    switch (cs.order()) {
    case 3: {
        const auto& p = cs["p"];
        return d(y, 3) + d(p * y, 1) + p * d(y, 1);
    }
    case 4: {
        const auto p = cs["tau1"].derivative();
        const auto q = cs["tau2"].derivative().derivative();
        return d(y, 4) - d(p * d(y, 1), 1) + q * y;
    }
    case 5: {
        const auto& p = cs["sigma0"];
        const auto q = -cs["sigma1"].derivative();
        return d(y, 5) + d(p * d(y, 2), 1) + d(p * d(y, 1), 2) + d(q * y, 1) + q * d(y, 1);
    }
    default:
        check_order(cs.order());
        return {};
    }
}

/// Quasi-derivatives y^[0..n] computed symbolically from the associated matrix entries.
inline std::vector<ChebSeries> quasi_derivatives(const CoefficientSet& cs, const ChebSeries& y) {
    const int n = cs.order();
    const auto entries = associated_entries(cs);
    std::vector<ChebSeries> q{y};
    for (int k = 1; k <= n; ++k) {
        ChebSeries next = q[k - 1].derivative();
        for (const auto& e : entries)
            if (e.row == k - 1)
                next = next - e.value * q[e.col];
        q.push_back(std::move(next));
    }
    return q;
}

/// max |y^[n](x) - l_n(y)(x)| over the grid. Only defined for smooth coefficient sets.
inline double verify_regularization(const CoefficientSet& cs, const ChebSeries& y,
                                    const std::vector<double>& x_grid) {
    if (!cs.smooth())
        throw InputError("regularization check requires Chebyshev (smooth) coefficients");
    const auto quasi = quasi_derivatives(cs, y);
    const auto direct = classical_expression(cs, y);
    double r = 0.0;
    for (double x : x_grid)
        r = std::max(r, std::abs(quasi.back()(x) - direct(x)));
    return r;
}

} // namespace quasispec
