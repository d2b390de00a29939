#include "helpers.hpp"

#include "quasispec/io.hpp"

#include <gtest/gtest.h>

using namespace quasispec;
using testing_support::random_smooth;

TEST(Io, CoefficientRoundTrip) {
    for (int n = 3; n <= 5; ++n) {
        const auto cs = random_smooth(n, 100 + n);
        const auto j = io::to_json(cs);
        const auto back = io::coefficients_from(json::parse(j.dump()));
        EXPECT_EQ(back.order(), n);
        for (const auto& nm : function_names(n))
            for (double x : {0.0, 0.3, 1.0})
                EXPECT_EQ(back[nm](x), cs[nm](x)) << nm;
        EXPECT_EQ(io::to_json(back).dump(), j.dump());
    }
}

TEST(Io, ParsesDocumentedFormat) {
    const auto j = json::parse(R"({
        "order": 4,
        "tau1": {"type": "chebyshev", "coeffs": [[0.5, 0.0], 0.25]},
        "tau2": {"type": "grid", "samples": [0, 1, 4, 9, 16], "degree": 3}
    })");
    const auto cs = io::coefficients_from(j);
    EXPECT_NEAR(std::abs(cs["tau1"](1.0) - 0.75), 0.0, 1e-15);
    EXPECT_FALSE(cs.smooth());
    EXPECT_NEAR(std::abs(cs["tau2"](0.5) - 4.0), 0.0, 1e-10);
    const auto again = io::to_json(cs);
    EXPECT_EQ(again["tau2"]["type"], "grid");
    EXPECT_EQ(again["tau2"]["degree"], 3);
}

TEST(Io, RejectsMalformedCoefficientFiles) {
    auto bad = [](const char* text) { return io::coefficients_from(json::parse(text)); };
    EXPECT_THROW(bad(R"({"order": 6})"), InputError);
    EXPECT_THROW(bad(R"({"order": 3})"), InputError);
    EXPECT_THROW(bad(R"({"order": "3", "p": {"type": "chebyshev", "coeffs": [0]}})"), InputError);
    EXPECT_THROW(bad(R"({"order": 3, "p": {"type": "spline", "coeffs": [0]}})"), InputError);
    EXPECT_THROW(bad(R"({"order": 3, "p": {"type": "chebyshev", "coeffs": [[1, 2, 3]]}})"), InputError);
    EXPECT_THROW(bad(R"({"order": 3, "p": {"type": "chebyshev", "coeffs": [0]}, "tau1": {}})"), InputError);
    EXPECT_THROW(bad(R"({"order": 3, "p": {"type": "grid", "samples": [0]}})"), InputError);
}

TEST(Io, SpectrumJsonAndCsv) {
    Spectrum s;
    s.problem = spectrum_spec(4, "S12");
    s.region = Box{cplx(0.0), 2.0, 3.0};
    s.eigenvalues = {{cplx(1.5, 0.0), 1, 1e-14}, {cplx(0.0, 2.0), 2, 3e-13}};
    s.region_count = 3;
    const auto j = io::to_json(s, "S12");
    EXPECT_EQ(j["problem"]["spectrum"], "S12");
    EXPECT_EQ(j["eigenvalues"].size(), 2u);
    EXPECT_EQ(j["eigenvalues"][1][2], 2);
    EXPECT_EQ(j["total_multiplicity"], 3);
    EXPECT_EQ(j["region_count"], 3);
    const auto csv = io::spectrum_csv(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,re,im,multiplicity,residual");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Io, InverseSpecRoundTrip) {
    const InverseSpec s{3, {"S1", "S2"}, {{1.0, cplx(2.0, 0.5)}, {3.0, 4.0}}, 4, true, false};
    const auto back = io::inverse_spec_from(json::parse(io::to_json(s).dump()));
    EXPECT_EQ(back.order, 3);
    EXPECT_EQ(back.spectra, s.spectra);
    EXPECT_EQ(back.targets, s.targets);
    EXPECT_EQ(back.modes, 4);
    EXPECT_THROW(io::inverse_spec_from(json::parse(R"({"order": 3, "spectra": ["S1"], "targets": []})")),
                 InputError);
}

TEST(Io, DigestIsStable) {
    EXPECT_EQ(io::digest(std::string()), "cbf29ce484222325");
    EXPECT_EQ(io::digest(std::string("a")), "af63dc4c8601ec8c");
    EXPECT_EQ(io::digest(io::to_json(CoefficientSet::zero(3))), io::digest(io::to_json(CoefficientSet::zero(3))));
}

TEST(Io, ReadFileErrors) {
    EXPECT_THROW(io::read_file("/nonexistent/problem.json"), InputError);
}
