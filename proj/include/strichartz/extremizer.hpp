#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strichartz/curves.hpp"
#include "strichartz/two_profile.hpp"

namespace strz {

// Time grid of the ascent. Frequencies with |phi(xi)| dt > mask_level are
// projected out of every iterate: beyond that the midpoint rule aliases in
// time and the discrete objective grows without bound.
struct AscentConfig {
    double T = 16.0;
    int n_times = 1024;
    double mask_level = 1.2;
};

SpaceTimeGrid ascent_grid(const Grid1D& g, const AscentConfig& cfg);
SampledFunction apply_band_mask(const CurveSpec& curve, const SampledFunction& f, const AscentConfig& cfg);
double band_mask_limit(const CurveSpec& curve, const AscentConfig& cfg); // largest unmasked |xi| on the grid

// ||E f||_6 / ||f||_2 on the ascent grid
double strichartz_quotient(const CurveSpec& curve, const SampledFunction& f, const AscentConfig& cfg = {});

struct AscentState {
    SampledFunction f;
    double quotient = 0.0;
    int iteration = 0;
    std::vector<double> trace; // quotient of iterate 0, 1, ...
    bool converged = false;
};

// One step of f -> E*(|Ef|^4 Ef), masked and normalised. The quotient of the
// input is written to *quotient when given.
SampledFunction ascent_step(const CurveSpec& curve, const SampledFunction& f, const AscentConfig& cfg = {},
                            double* quotient = nullptr);

AscentState search_extremizer(const CurveSpec& curve, const SampledFunction& f0, int max_iter, double tol,
                              const AscentConfig& cfg = {});

struct GradientCheck {
    double error_coarse = 0.0; // step 1e-5
    double error_fine = 0.0;   // step 1e-6
    double worst() const { return error_coarse; }
};

// Phi(f) = ||E f||_6^6 against central differences in random directions,
// with the full extend / extend_adjoint pair.
GradientCheck gradient_check(const CurveSpec& curve, const SampledFunction& f, int n_directions,
                             std::uint64_t seed = 7, const AscentConfig& cfg = {});

// Gaussian e^{-x^2/(2a^2)} under e^{i t c xi^2}, |t| <= T
double gaussian_schrodinger_quotient(double a, double c, double T);
double gaussian_schrodinger_quotient_full(); // T -> infinity, any a, c = 1

double threshold_factor(const CurveSpec& curve);

struct ThresholdConfig {
    double L = 64.0;
    int n = 1024;
    AscentConfig ascent;
    WindowConfig window;
    double gaussian_width = 1.0;
    int max_iter = 200;
    double tol = 1e-9;
    double tolerance = 0.01;
    int restarts = 3;
    std::uint64_t seed = 1;
};

struct ThresholdReport {
    CurveSpec curve;
    double factor = 0.0;
    double threshold = 0.0;
    double schrodinger_M2 = 0.0;
    double schrodinger_search = 0.0;
    double schrodinger_oracle = 0.0;
    bool m2_from_oracle = false;
    double search_M = 0.0;
    std::vector<double> restart_M;
    bool multimodal = false;
    double two_profile_M = 0.0;
    double two_profile_rel_gap = 0.0; // |two_profile_M / threshold - 1|
    double lower_bound_M = 0.0;
    std::string verdict; // "above" or "inconclusive"
    std::vector<std::string> notes;
};

ThresholdReport threshold_report(const CurveSpec& curve, const ThresholdConfig& cfg = {});

} // namespace strz
