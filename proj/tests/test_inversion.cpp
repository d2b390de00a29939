#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace quasispec;
using testing_support::random_smooth;

namespace {

CoefficientSet small_truth3() { return CoefficientSet::chebyshev(3, {{0.2, -0.1, 0.05}}); }

} // namespace

TEST(Inversion, ForwardMapFreeMatchesClosedForm) {
    const auto ev = forward_map(CoefficientSet::zero(4), {"S12", "S23"}, 3);
    ASSERT_EQ(ev.size(), 2u);
    for (int s = 0; s < 2; ++s) {
        const auto want = free_eigenvalues(4, s == 0 ? "S12" : "S23", 3);
        for (int i = 0; i < 3; ++i)
            EXPECT_LT(std::abs(ev[s][i] - want[i]) / std::abs(want[i]), 1e-8);
    }
    EXPECT_THROW(forward_map(CoefficientSet::zero(4), {"S12"}, 0), InputError);
    EXPECT_THROW(forward_map(CoefficientSet::zero(4), {"S99"}, 1), InputError);
}

TEST(Inversion, ForwardMapIsDeterministic) {
    const auto cs = random_smooth(3, 4);
    const auto a = forward_map(cs, {"S1", "S2"}, 3);
    const auto b = forward_map(cs, {"S1", "S2"}, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s)
        for (std::size_t i = 0; i < a[s].size(); ++i)
            EXPECT_EQ(a[s][i], b[s][i]);
}

TEST(Inversion, ParameterizationRoundTrip) {
    for (int n = 3; n <= 5; ++n) {
        const Parameterization p(n, 5);
        Eigen::VectorXd theta(p.size());
        for (int i = 0; i < p.size(); ++i)
            theta[i] = 0.1 * std::sin(1.0 + i);
        const auto back = p.from_coefficients(p.to_coefficients(theta));
        EXPECT_LT((back - theta).norm(), 1e-12) << n;
    }
}

TEST(Inversion, GaugeParameterizationKeepsTau2Periodic) {
    const Parameterization p(4, 6);
    EXPECT_TRUE(p.gauge());
    EXPECT_EQ(p.size(), 11);
    Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(p.size(), -0.3, 0.4);
    const auto cs = p.to_coefficients(theta);
    EXPECT_LT(std::abs(cs["tau2"](1.0) - cs["tau2"](0.0)), 1e-14);
    // projection removes a multiple of x from tau2
    const auto shifted = cs.gauge_shifted(0.7);
    EXPECT_LT((p.from_coefficients(shifted) - theta).norm(), 1e-12);
    EXPECT_THROW(Parameterization(3, 1), InputError);
}

TEST(Inversion, ComplexModesDoubleTheParameterCount) {
    const Parameterization p(3, 4, true, true);
    EXPECT_EQ(p.size(), 8);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(8);
    theta[5] = 0.25;
    const auto cs = p.to_coefficients(theta);
    EXPECT_EQ(cs["p"].coeffs()[1], cplx(0.0, 0.25));
}

TEST(Inversion, MatchNearest) {
    const std::vector<cplx> t{1.0, 5.0, cplx(3.0, 1.0)};
    const std::vector<cplx> c{cplx(3.1, 0.9), 0.9, 7.0, 5.2};
    const auto m = match_nearest(t, c);
    EXPECT_EQ(m, (std::vector<int>{1, 3, 0}));
    EXPECT_THROW(match_nearest(t, {1.0}), InputError);
}

TEST(Inversion, FixedPointNeedsNoIterations) {
    const auto truth = small_truth3();
    const InverseSpec spec{3, {"S1", "S2"}, forward_map(truth, {"S1", "S2"}, 3), 3, true, false};
    const auto res = recover(spec, truth);
    EXPECT_EQ(res.iterations, 0);
    EXPECT_LT(res.relative_residual, 1e-10);
    EXPECT_TRUE(res.converged) << res.message;
    EXPECT_EQ(res.spectra.size(), 2u);
}

TEST(Inversion, TooFewEigenvaluesReported) {
    // one S1 eigenvalue cannot fix three modes of p
    const auto truth = small_truth3();
    const InverseSpec spec{3, {"S1"}, forward_map(truth, {"S1"}, 1), 3, true, false};
    const auto res = recover(spec, CoefficientSet::zero(3));
    EXPECT_FALSE(res.converged);
    EXPECT_TRUE(res.rank_deficient);
    EXPECT_LT(res.rank, res.parameter_count);
    EXPECT_FALSE(res.message.empty());
}

TEST(Inversion, SpecValidation) {
    InverseSpec bad{3, {"S1"}, {{1.0, 2.0}, {3.0}}, 3, true, false};
    EXPECT_THROW(bad.validate(), InputError);
    InverseSpec unknown{3, {"S12"}, {{1.0}}, 3, true, false};
    EXPECT_THROW(unknown.validate(), InputError);
}

TEST(Inversion, SmallTwinOrder3) {
    TwinOptions to;
    to.modes = 3;
    to.seed = 5;
    const auto rep = twin_experiment(small_truth3(), 0.05, 3, to);
    EXPECT_TRUE(rep.result.converged) << rep.result.message;
    ASSERT_FALSE(rep.errors.sup.empty());
    EXPECT_LT(rep.errors.sup[0], 1e-6);
    EXPECT_GT(rep.separation.min_distance, 0.0);
    EXPECT_EQ(rep.target_spectra.size(), 2u);
    ASSERT_FALSE(rep.result.history.empty());
    EXPECT_LE(rep.result.history.back().residual, rep.result.history.front().residual);
}

TEST(Inversion, CoefficientErrorsModuloGauge) {
    const auto cs = random_smooth(4, 2);
    const auto e = coefficient_errors(cs, cs.gauge_shifted(0.3), true);
    for (double v : e.sup)
        EXPECT_LT(v, 1e-10);
    const auto raw = coefficient_errors(cs, cs.gauge_shifted(0.3), false);
    double worst = 0.0;
    for (double v : raw.sup)
        worst = std::max(worst, v);
    EXPECT_NEAR(worst, 0.3, 1e-12);
}

TEST(Inversion, Order3FromZeroInitialGuess) {
    // truth inside the 5-mode model space; eight eigenvalues of S1 and S2
    const auto truth = CoefficientSet::chebyshev(
        3, {ChebSeries::interpolate([](double x) { return cplx(0.3 * std::cos(pi * x)); }, 5).coeffs()});
    const InverseSpec spec{3, spectrum_names(3), forward_map(truth, spectrum_names(3), 8), 5, true, false};
    const auto res = recover(spec, CoefficientSet::zero(3));
    EXPECT_LT(coefficient_errors(res.recovered, truth).max(), 1e-4) << res.message;
}
