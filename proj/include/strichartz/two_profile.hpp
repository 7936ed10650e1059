#pragma once

#include <string>
#include <vector>

#include "strichartz/curves.hpp"

namespace strz {

struct TwoProfileInput {
    SampledFunction g1;
    SampledFunction g2;
    double N = 0.0;
};

// Time windows are matched in Schrodinger time: a field whose quadratic
// coefficient is c is integrated over |t| <= S / c.
struct WindowConfig {
    double S = 16.0;
    int n_times = 320;
};

struct TwoProfileBuild {
    SampledFunction f;
    double overlap = 0.0; // spectral mass of either bump on the wrong half-line, relative
};

TwoProfileBuild build_two_profile_checked(const TwoProfileInput& inp, bool conjugate_second);
SampledFunction build_two_profile(const TwoProfileInput& inp, bool conjugate_second);

// (1/2pi) int_0^{2pi} |e^{i theta} z1 + e^{-i theta} z2|^6 d theta
double circle_average_sixth(double z1_mod, double z2_mod);

double schrodinger_coefficient(const CurveSpec& curve);
// ||e^{i t c Delta} f||_6 over |t| <= S / c
double schrodinger_norm(const SampledFunction& f, double c, const WindowConfig& w);
double homogenized_norm(const CurveSpec& curve, const SampledFunction& g1, const SampledFunction& g2,
                        bool conjugate_second, const WindowConfig& w);

enum class SweepPath { Auto, Raw, Approx };

struct SweepResult {
    std::vector<double> N_values;
    std::vector<double> norms;
    std::vector<double> relative_gaps;
    std::vector<double> overlaps;
    std::vector<std::string> paths;
    double limit_prediction = 0.0;
    double schrodinger_reference = 0.0; // ||e^{it Delta} g1||_6 on the window S
};

// effective quadratic coefficient of the curve at carrier N (raw time variable)
double carrier_coefficient(const CurveSpec& curve, double N);

// ||E(e^{iNx} g1 + e^{-iNx} g2')||_6 by direct extension on the grid
double two_profile_norm_raw(const CurveSpec& curve, const TwoProfileInput& inp, bool conjugate_second,
                            const WindowConfig& w);
// the same quantity for inhom35 through the reduction to the approximate operators
double two_profile_norm_approx(const TwoProfileInput& inp, bool conjugate_second, const WindowConfig& w);

SweepResult sweep_two_profile(const CurveSpec& curve, const SampledFunction& g1, const SampledFunction& g2,
                              const std::vector<double>& N_list, bool conjugate_second, const WindowConfig& w,
                              SweepPath path = SweepPath::Auto);

double asymptotic_schrodinger_gap(double N, int sign, const SampledFunction& f, const SpaceTimeGrid& sg);

} // namespace strz
