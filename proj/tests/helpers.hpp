#pragma once

#include "quasispec/quasispec.hpp"

#include <functional>
#include <random>
#include <vector>

namespace testing_support {

/// Real Chebyshev coefficients with decaying seeded amplitudes, one list per unknown function.
inline quasispec::CoefficientSet random_smooth(int order, unsigned long long seed, int modes = 5,
                                               double amplitude = 0.5) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<quasispec::cplx>> lists;
    for (std::size_t f = 0; f < quasispec::function_names(order).size(); ++f) {
        std::vector<quasispec::cplx> c;
        for (int k = 0; k < modes; ++k)
            c.push_back(amplitude * u(rng) / (1.0 + k));
        lists.push_back(c);
    }
    return quasispec::CoefficientSet::chebyshev(order, lists);
}

inline quasispec::CoefficientSet from_functions(int order, const std::vector<std::function<quasispec::cplx(double)>>& fs,
                                                int modes = 24) {
    std::vector<std::vector<quasispec::cplx>> lists;
    for (const auto& f : fs)
        lists.push_back(quasispec::ChebSeries::interpolate(f, modes).coeffs());
    return quasispec::CoefficientSet::chebyshev(order, lists);
}

inline double rel(quasispec::cplx a, quasispec::cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace testing_support
