#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace quasispec;
using testing_support::random_smooth;

namespace {

void expect_structure(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    cplx tr = 0.0;
    for (int k = 0; k < n; ++k) {
        tr += m(k, k);
        for (int j = k + 1; j < n; ++j)
            EXPECT_EQ(m(k, j), j == k + 1 ? cplx(1.0) : cplx(0.0));
    }
    EXPECT_LT(std::abs(tr), 1e-14);
}

} // namespace

TEST(Model, ZeroOrder3IsShift) {
    const auto F = build_associated_matrix(CoefficientSet::zero(3));
    for (double x : {0.0, 0.3, 1.0}) {
        const Matrix m = F(x);
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j)
                EXPECT_EQ(m(k, j), j == k + 1 ? cplx(1.0) : cplx(0.0));
    }
}

TEST(Model, Order4ConstantTau2) {
    const auto F = build_associated_matrix(CoefficientSet::chebyshev(4, {{0.0}, {1.0}}));
    const Matrix m = F(0.37);
    EXPECT_EQ(m(1, 0), cplx(-1.0));
    EXPECT_EQ(m(2, 1), cplx(2.0));
    EXPECT_EQ(m(3, 0), cplx(1.0));
    EXPECT_EQ(m(3, 2), cplx(-1.0));
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j) {
            const bool listed = (k == 1 && j == 0) || (k == 2 && j == 1) || (k == 3 && j == 0) ||
                                (k == 3 && j == 2) || j == k + 1;
            if (!listed) {
                EXPECT_EQ(m(k, j), cplx(0.0)) << k << "," << j;
            }
        }
}

TEST(Model, Order5LinearSigma0) {
    // sigma0 = x is the series 0.5 + 0.5 T1(2x - 1)
    const auto F = build_associated_matrix(CoefficientSet::chebyshev(5, {{0.5, 0.5}, {1.0}}));
    const double x = 0.61;
    const Matrix m = F(x);
    EXPECT_NEAR(std::abs(m(2, 0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(m(2, 1) + x), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(m(3, 2) + x), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(m(4, 2) + 1.0), 0.0, 1e-15);
    expect_structure(m);
}

TEST(Model, StructureForRandomSets) {
    for (int n = 3; n <= 5; ++n)
        for (unsigned s = 1; s <= 3; ++s) {
            const auto F = build_associated_matrix(random_smooth(n, s));
            EXPECT_NO_THROW(validate_structure(F));
            for (double x : {0.0, 0.13, 0.5, 0.99, 1.0})
                expect_structure(F(x));
        }
}

TEST(Model, StarOfDisplayedMatrixIsItself) {
    for (int n = 3; n <= 5; ++n) {
        const auto F = build_associated_matrix(random_smooth(n, 7 + n));
        const auto Fs = build_star_matrix(F);
        for (double x : {0.0, 0.21, 0.77, 1.0})
            EXPECT_LT(max_abs(Fs(x) - F(x)), 1e-15) << "order " << n;
    }
}

TEST(Model, StarIsInvolution) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int n = 3; n <= 5; ++n) {
        Matrix lower = Matrix::Zero(n, n);
        for (int k = 0; k < n; ++k)
            for (int j = 0; j <= k; ++j)
                lower(k, j) = cplx(g(rng), g(rng));
        cplx tr = 0.0;
        for (int k = 0; k < n - 1; ++k)
            tr += lower(k, k);
        lower(n - 1, n - 1) = -tr;
        const AssociatedMatrix F(n, [lower, n](double x, Matrix& out) {
            for (int k = 0; k < n; ++k)
                for (int j = 0; j <= k; ++j)
                    out(k, j) = lower(k, j) * (1.0 + x);
            for (int k = 0; k + 1 < n; ++k)
                out(k, k + 1) = 1.0;
        });
        const auto Fss = build_star_matrix(build_star_matrix(F));
        for (double x : {0.0, 0.4, 1.0})
            EXPECT_LT(max_abs(Fss(x) - F(x)), 1e-15);
        expect_structure(build_star_matrix(F)(0.4));
    }
}

TEST(Model, StructureViolationRejected) {
    const AssociatedMatrix bad(3, [](double, Matrix& out) {
        out(0, 1) = 1.0;
        out(1, 2) = 1.0;
        out(0, 0) = 1.0;
    });
    EXPECT_THROW(validate_structure(bad), InputError);
    EXPECT_THROW(build_star_matrix(bad), InputError);
}

TEST(Model, UnsupportedOrderRejected) {
    EXPECT_THROW(CoefficientSet::zero(6), InputError);
    EXPECT_THROW(CoefficientSet::zero(2), InputError);
}

TEST(Model, FunctionNamesMustMatchOrder) {
    std::map<std::string, CoefficientFunction> f;
    f["p"] = from_chebyshev({0.0});
    EXPECT_THROW(CoefficientSet(4, f), InputError);
    EXPECT_NO_THROW(CoefficientSet(3, f));
}

TEST(Model, RegularizationConstantTestFunction) {
    const auto cs = CoefficientSet::chebyshev(3, {{0.2, -0.4, 0.1}});
    const auto q = quasi_derivatives(cs, ChebSeries::constant(1.0));
    const auto dp = cs["p"].derivative();
    for (double x : {0.0, 0.5, 1.0})
        EXPECT_LT(std::abs(q[3](x) - dp(x)), 1e-12);
    EXPECT_LT(verify_regularization(cs, ChebSeries::constant(1.0), {0.0, 0.25, 0.5, 0.75, 1.0}), 1e-12);
}

TEST(Model, RegularizationOrder3SymbolicOracle) {
    // p = x^2, y = x^3: l3(y) = 6 + (x^5)' + 3 x^4 = 6 + 8 x^4
    CoefficientSet cs(3, {{"p", from_chebyshev(ChebSeries::from_monomials({0.0, 0.0, 1.0}).coeffs())}});
    const auto y = ChebSeries::from_monomials({0.0, 0.0, 0.0, 1.0});
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i)
        grid.push_back(i / 20.0);
    EXPECT_LT(verify_regularization(cs, y, grid), 1e-10);
    const auto q = quasi_derivatives(cs, y);
    for (double x : grid)
        EXPECT_NEAR(std::abs(q[3](x) - (6.0 + 8.0 * std::pow(x, 4))), 0.0, 1e-10);
}

TEST(Model, RegularizationOrder4FreeCase) {
    const auto y = ChebSeries::from_monomials({0, 0, 0, 0, 0, 1.0});
    const auto cs = CoefficientSet::zero(4);
    const auto q = quasi_derivatives(cs, y);
    for (double x : {0.0, 0.3, 1.0})
        EXPECT_NEAR(std::abs(q[4](x) - 120.0 * x), 0.0, 1e-12);
    EXPECT_LT(verify_regularization(cs, y, {0.0, 0.5, 1.0}), 1e-12);
}

TEST(Model, RegularizationRandomSmoothAllOrders) {
    const auto y = ChebSeries::from_monomials({0.3, -1.0, 0.5, 0.0, 2.0, -0.7, 0.1});
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i)
        grid.push_back(i / 50.0);
    for (int n = 3; n <= 5; ++n)
        EXPECT_LT(verify_regularization(random_smooth(n, 11 * n), y, grid), 1e-10) << "order " << n;
}

TEST(Model, RegularizationRejectsGridInput) {
    std::map<std::string, CoefficientFunction> f;
    f["p"] = from_grid({0.0, 0.5, 1.0, 0.5});
    CoefficientSet cs(3, f);
    EXPECT_FALSE(cs.smooth());
    EXPECT_THROW(verify_regularization(cs, ChebSeries::constant(1.0), {0.5}), InputError);
}

TEST(Model, GridInterpolationReproducesSamples) {
    std::vector<cplx> s{0.0, 1.0, 4.0, 9.0, 16.0};
    // samples of 16 x^2; local cubic interpolation reproduces it exactly
    const auto f = from_grid(s, 3);
    for (int i = 0; i < 5; ++i)
        EXPECT_NEAR(std::abs(f.series(i / 4.0) - s[i]), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(f.series(0.125) - 0.25), 0.0, 1e-10);
    EXPECT_THROW(from_grid({1.0}), InputError);
}

TEST(Model, GaugeCanonicalForm) {
    const auto cs = CoefficientSet::chebyshev(4, {{0.1, 0.2}, {0.0, 0.3, 0.0, 0.05}});
    EXPECT_FALSE(cs.canonical());
    const auto c = cs.canonicalized();
    EXPECT_TRUE(c.canonical());
    const auto& t2 = c["tau2"];
    EXPECT_NEAR(std::abs(t2(1.0) - t2(0.0)), 0.0, 1e-14);
    // the difference is exactly a multiple of x
    const auto d0 = cs["tau2"](0.0) - t2(0.0);
    EXPECT_NEAR(std::abs(d0), 0.0, 1e-14);
    const auto shifted = cs.gauge_shifted(0.5);
    EXPECT_NEAR(std::abs(shifted["tau2"](0.4) - cs["tau2"](0.4) - 0.2), 0.0, 1e-14);
    EXPECT_THROW(CoefficientSet::zero(3).gauge_shifted(1.0), InputError);
}

TEST(Model, ComplexCoefficientsAccepted) {
    const auto cs = CoefficientSet::chebyshev(3, {{cplx(0.1, 0.2), cplx(0.0, -0.3)}});
    const auto F = build_associated_matrix(cs);
    EXPECT_NEAR(std::abs(F(1.0)(1, 0) - cplx(-0.1, 0.1)), 0.0, 1e-15);
    EXPECT_LT(verify_regularization(cs, ChebSeries::from_monomials({0, 1.0, 1.0}), {0.0, 0.5, 1.0}), 1e-12);
}
