#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace quasispec;
using testing_support::from_functions;
using testing_support::random_smooth;

namespace {

const PropagatorOptions fine{1e-12};

Spectrum first_delta_zero(const AssociatedMatrix& F, int k) {
    SpectrumOptions so;
    so.tol = 1e-12;
    return find_spectrum(F, delta_problem(F.order(), k, k), plan_search_box(F.order(), 1), 1, so);
}

} // namespace

TEST(Identities, SymplecticOrder3) {
    const auto F = build_associated_matrix(random_smooth(3, 31));
    EXPECT_LT(check_symplectic(F, cplx(2.0, 1.0), fine), 1e-8);
}

TEST(Identities, SymplecticOrder4) {
    const auto F = build_associated_matrix(random_smooth(4, 41));
    EXPECT_LT(check_symplectic(F, 5.0, fine), 1e-8);
}

TEST(Identities, SymplecticOrder5) {
    const auto F = build_associated_matrix(random_smooth(5, 51));
    EXPECT_LT(check_symplectic(F, cplx(-4.0, 7.0), fine), 1e-8);
}

TEST(Identities, FreeCaseAgainstClosedForm) {
    for (int n = 3; n <= 5; ++n) {
        const auto F = build_associated_matrix(CoefficientSet::zero(n));
        const Matrix M = weyl_matrix(F, 1.0, fine).matrix;
        EXPECT_LT(max_abs(M - free_weyl_matrix(n, 1.0)), 1e-10) << n;
        const Matrix Ms = free_weyl_matrix(n, n % 2 == 0 ? 1.0 : -1.0);
        const auto J = build_sign_matrices(n);
        EXPECT_LT(max_abs(Ms.transpose() * J.J0 * M - J.J0), 1e-10) << n;
        EXPECT_LT(check_symplectic(F, 1.0, fine), 1e-10) << n;
    }
}

TEST(Identities, StarProblemReproducesReflectedWeylMatrix) {
    for (int n = 3; n <= 5; ++n) {
        const auto F = build_associated_matrix(random_smooth(n, 60 + n));
        const cplx l(3.0, -2.0);
        const double s = n % 2 == 0 ? 1.0 : -1.0;
        EXPECT_LT(max_abs(star_weyl_matrix(F, l, fine) - weyl_matrix(F, s * l, fine).matrix), 1e-8) << n;
    }
}

TEST(Identities, OrderRelationsOrder3) {
    const auto cs = from_functions(3, {[](double x) { return cplx(std::cos(pi * x)); }});
    const auto r = check_order_relations(build_associated_matrix(cs), 1.7, fine);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_LT(r[0], 1e-8);
}

TEST(Identities, OrderRelationsOrder4) {
    const auto cs = from_functions(4, {[](double x) { return cplx(x); }, [](double x) { return cplx(std::sin(x)); }});
    const auto r = check_order_relations(build_associated_matrix(cs), cplx(2.0, -1.0), fine);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_LT(r[0], 1e-8);
    EXPECT_LT(r[1], 1e-8);
}

TEST(Identities, OrderRelationsOrder5) {
    const auto cs = from_functions(5, {[](double) { return cplx(1.0); }, [](double x) { return cplx(x * x); }});
    const auto r = check_order_relations(build_associated_matrix(cs), 3.0, fine);
    ASSERT_EQ(r.size(), 3u);
    for (double v : r)
        EXPECT_LT(v, 1e-8);
}

TEST(Identities, ResidualsDoNotGrowWhenToleranceTightens) {
    const auto F = build_associated_matrix(random_smooth(4, 77));
    const cplx l(6.0, 2.0);
    const double r1 = check_symplectic(F, l, {1e-8});
    const double r2 = check_symplectic(F, l, {1e-12});
    EXPECT_LE(r2, std::max(r1, 1e-11));
    double o1 = 0.0, o2 = 0.0;
    for (double v : check_order_relations(F, l, {1e-8}))
        o1 = std::max(o1, v);
    for (double v : check_order_relations(F, l, {1e-12}))
        o2 = std::max(o2, v);
    EXPECT_LE(o2, std::max(o1, 1e-11));
}

TEST(Identities, ResidualsSmallOnBothSidesOfTau2Shift) {
    const auto cs = random_smooth(4, 88);
    const cplx l(4.0, 1.5);
    for (const auto& c : {cs, cs.gauge_shifted(0.5)}) {
        const auto F = build_associated_matrix(c);
        EXPECT_LT(check_symplectic(F, l, fine), 1e-8);
        for (double v : check_order_relations(F, l, fine))
            EXPECT_LT(v, 1e-8);
    }
}

TEST(Identities, Tau2ShiftMovesWeylMatrixButNotS23) {
    // m21 changes under tau2 -> tau2 + c x; the S23 determinant does not
    const auto cs = random_smooth(4, 88);
    const auto F = build_associated_matrix(cs);
    const auto G = build_associated_matrix(cs.gauge_shifted(0.5));
    const cplx l(4.0, 1.5);
    const Matrix a = weyl_matrix(F, l, fine).matrix, b = weyl_matrix(G, l, fine).matrix;
    EXPECT_GT(std::abs(a(1, 0) - b(1, 0)), 1e-3 * std::abs(a(1, 0)));
    const auto s23 = spectrum_spec(4, "S23");
    const cplx c1 = char_value(F, l, s23, fine), c2 = char_value(G, l, s23, fine);
    EXPECT_LT(std::abs(c1 - c2), 1e-9 * std::abs(c1));
}

TEST(Identities, SampledLambdasAreDeterministicAndInAnnulus) {
    const auto F = build_associated_matrix(random_smooth(3, 5));
    const auto a = sample_lambdas(F, 8, 42), b = sample_lambdas(F, 8, 42);
    ASSERT_EQ(a.size(), 8u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i], b[i]);
        EXPECT_GE(std::abs(a[i]), 1.0);
        EXPECT_LE(std::abs(a[i]), 50.0);
    }
}

TEST(Identities, LaurentConvolutionOrder4SimpleZero) {
    const auto F = build_associated_matrix(random_smooth(4, 13));
    const auto z = first_delta_zero(F, 2);
    ASSERT_FALSE(z.eigenvalues.empty());
    ASSERT_EQ(z.eigenvalues[0].multiplicity, 1);
    const auto rep = check_laurent_convolution(F, nullptr, z.eigenvalues[0].lambda, 1, fine);
    EXPECT_EQ(rep.multiplicity, 1);
    EXPECT_LT(rep.residual, 1e-6);
}

TEST(Identities, LaurentResidueReduction) {
    // kappa = 1, i = -1: m42<-1> = m32<-1> m21<0>
    const auto F = build_associated_matrix(random_smooth(4, 13));
    const cplx l0 = first_delta_zero(F, 2).eigenvalues.at(0).lambda;
    const double r = 0.05 * std::pow(1.0 + std::abs(l0), 0.75);
    ComplexFunction m42 = [&](cplx l) { return weyl_entry(F, l, 4, 2, fine); };
    ComplexFunction m32 = [&](cplx l) { return weyl_entry(F, l, 3, 2, fine); };
    const cplx lhs = laurent_coeff(m42, l0, -1, r, 32, 1e-9);
    const cplx rhs = laurent_coeff(m32, l0, -1, r, 32, 1e-9) * weyl_entry(F, l0, 2, 1, fine);
    EXPECT_LT(std::abs(lhs - rhs), 1e-6 * std::abs(lhs));
}

TEST(Identities, LaurentConvolutionOrder5) {
    const auto F = build_associated_matrix(random_smooth(5, 17));
    const auto z = first_delta_zero(F, 3);
    ASSERT_FALSE(z.eigenvalues.empty());
    const auto rep = check_laurent_convolution(F, nullptr, z.eigenvalues[0].lambda, z.eigenvalues[0].multiplicity, fine);
    EXPECT_LT(rep.residual, 1e-6);
}

TEST(Identities, LaurentAtAnalyticPointIsZero) {
    const auto F = build_associated_matrix(random_smooth(4, 13));
    const auto rep = check_laurent_convolution(F, nullptr, cplx(2.0, 3.0), 0, fine);
    EXPECT_EQ(rep.multiplicity, 0);
    EXPECT_EQ(rep.residual, 0.0);
}

TEST(Identities, LaurentRejectsWrongMultiplicity) {
    const auto F = build_associated_matrix(random_smooth(4, 13));
    const cplx l0 = first_delta_zero(F, 2).eigenvalues.at(0).lambda;
    EXPECT_THROW(check_laurent_convolution(F, nullptr, l0, 2, fine), NumericalError);
    EXPECT_THROW(check_laurent_convolution(build_associated_matrix(CoefficientSet::zero(3)), nullptr, 1.0, 1),
                 InputError);
}

TEST(Identities, EntireRatioIdenticalProblems) {
    const auto F = build_associated_matrix(random_smooth(4, 3));
    const auto rep = check_entire_ratio(F, F, plan_search_box(4, 1), fine);
    EXPECT_FALSE(rep.zeros.empty());
    EXPECT_LT(rep.max_singular, 1e-12);
}

TEST(Identities, EntireRatioMismatchedProblemsDetected) {
    const auto F = build_associated_matrix(random_smooth(4, 3));
    const auto G = build_associated_matrix(random_smooth(4, 4));
    EXPECT_GT(check_entire_ratio(F, G, plan_search_box(4, 1), fine).max_singular, 1e-6);
}

TEST(Identities, PMatrixIdenticalProblems) {
    const auto F = build_associated_matrix(random_smooth(4, 9));
    const std::vector<cplx> ls{cplx(2.0, 1.0), cplx(-3.0, 0.5), 7.0};
    EXPECT_LT(check_P_matrix(F, F, ls, {0.25, 0.5, 1.0}, fine), 1e-8);
}

TEST(Identities, PMatrixUnrelatedProblemsDetected) {
    const auto F = build_associated_matrix(random_smooth(3, 9));
    const auto G = build_associated_matrix(random_smooth(3, 10));
    const std::vector<cplx> ls{cplx(2.0, 1.0), cplx(-3.0, 0.5), 7.0};
    EXPECT_GT(check_P_matrix(F, G, ls, {0.5, 1.0}, fine), 1e-6);
}

TEST(Identities, PMatrixRejectsOrderMismatch) {
    const auto F = build_associated_matrix(CoefficientSet::zero(3));
    const auto G = build_associated_matrix(CoefficientSet::zero(4));
    EXPECT_THROW(check_P_matrix(F, G, {1.0}, {0.5}), InputError);
}

TEST(Identities, SeparationFreeOrder4) {
    const auto F = build_associated_matrix(CoefficientSet::zero(4));
    const auto pairs = separation_pairs(F, plan_search_box(4, 1));
    ASSERT_EQ(pairs.size(), 2u);
    const auto rep = check_separation({pairs[0]});
    EXPECT_GT(rep.min_distance, 1.0);
    EXPECT_FALSE(rep.violation);
}

TEST(Identities, SeparationDegenerateInputs) {
    const auto F = build_associated_matrix(CoefficientSet::zero(4));
    const auto z = delta_zeros(F, 1, plan_search_box(4, 1));
    ASSERT_FALSE(z.eigenvalues.empty());
    const auto same = check_separation({{z, z}});
    EXPECT_EQ(same.min_distance, 0.0);
    EXPECT_TRUE(same.violation);
    const auto empty = check_separation({{Spectrum{}, z}});
    EXPECT_TRUE(std::isinf(empty.min_distance));
    EXPECT_FALSE(empty.violation);
}

TEST(Identities, VerificationSuiteOnFreeProblem) {
    VerificationOptions vo;
    vo.lambda_samples = 4;
    const auto recs = run_verification(CoefficientSet::zero(4), nullptr, check_names(), vo);
    ASSERT_EQ(recs.size(), check_names().size());
    for (const auto& r : recs)
        EXPECT_TRUE(r.passed) << r.name << " " << r.value;
    EXPECT_THROW(run_verification(CoefficientSet::zero(4), nullptr, {"bogus"}), InputError);
}
