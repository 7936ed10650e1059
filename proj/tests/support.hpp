#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "strichartz/grid.hpp"

namespace testing_support {

using strz::cplx;
using strz::cvec;
using strz::Grid1D;
using strz::SampledFunction;

// e^{-x^2/(2a^2)} e^{i v x}, optionally centred at x0
inline SampledFunction gaussian(const Grid1D& g, double a = 1.0, double v = 0.0, double x0 = 0.0) {
    cvec s(g.n);
    for (int j = 0; j < g.n; ++j) {
        double x = g.x(j) - x0;
        s[j] = std::exp(-x * x / (2 * a * a)) * cplx(std::cos(v * g.x(j)), std::sin(v * g.x(j)));
    }
    return SampledFunction::from_space(g, s);
}

inline SampledFunction normalized(const SampledFunction& f) { return f.scaled(1.0 / strz::l2_norm(f)); }

// random smooth spectrum on [lo, hi]
inline SampledFunction random_band(const Grid1D& g, double lo, double hi, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    cvec hat(g.n, 0.0);
    for (int k = 0; k < g.n; ++k) {
        double xi = g.xi(k);
        if (xi >= lo && xi <= hi) {
            double taper = std::sin(std::numbers::pi * (xi - lo) / (hi - lo));
            hat[k] = taper * cplx(nd(rng), nd(rng));
        }
    }
    return SampledFunction::from_freq(g, hat);
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline int reflect_index(int j, int n) { return (n - j) % n; }

} // namespace testing_support
