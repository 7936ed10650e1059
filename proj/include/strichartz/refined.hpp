#pragma once

#include <cstdint>
#include <vector>

#include "strichartz/curves.hpp"
#include "strichartz/dyadic.hpp"

namespace strz {

struct ScaleRange {
    int j_min = 0, j_max = 0;
};

struct CellRestriction {
    SampledFunction source;
    DyadicInterval cell;
    SampledFunction restricted;
};

// Spectrum multiplied by the indicator of [lo, hi). Empty overlap gives zero.
SampledFunction restrict_to_cell(const SampledFunction& f, const DyadicInterval& cell);
CellRestriction make_cell_restriction(const SampledFunction& f, const DyadicInterval& cell);

// Spectral mass sum |fhat|^2 dxi / 2pi inside the cell
double cell_mass(const SampledFunction& f, const DyadicInterval& cell);

// cells at the given scales whose mass exceeds rel * total, ordered by (j, k)
std::vector<DyadicInterval> cells_meeting_spectrum(const SampledFunction& f, const ScaleRange& scales,
                                                   double rel = 1e-10);

// |c+c^3|^{(q-3)/(3q)} |tau|^{(q-3)/q} for Inhom35, |c|^{(l-2)(q-3)/(3q)} |tau|^{(q-3)/q} for HomOdd
double bilinear_normalizer(const CurveSpec& curve, const DyadicInterval& tau, double q);

// One relative period on the torus: T = L / |phi'(c) - phi'(c')|.
SpaceTimeGrid transit_grid(const CurveSpec& curve, const Grid1D& g, const DyadicInterval& tau,
                           const DyadicInterval& taup, int max_times = 8192);

// || E u_tau E v_tau' ||_{L^q}
double bilinear_numerator(const CurveSpec& curve, const SampledFunction& u, const SampledFunction& v,
                          const DyadicInterval& tau, const DyadicInterval& taup, double q,
                          const SpaceTimeGrid& sg);
double bilinear_ratio(const CurveSpec& curve, const SampledFunction& u, const SampledFunction& v,
                      const DyadicInterval& tau, const DyadicInterval& taup, double q, const SpaceTimeGrid& sg);
// same, on transit_grid(curve, grid, tau, taup)
double bilinear_ratio(const CurveSpec& curve, const SampledFunction& u, const SampledFunction& v,
                      const DyadicInterval& tau, const DyadicInterval& taup, double q);

struct QuasiOrthogonality {
    double lhs = 0.0, rhs = 0.0;
    int pairs = 0;
};

QuasiOrthogonality quasi_orthogonality_gap(const CurveSpec& curve, const SampledFunction& f, int depth,
                                           const ScaleRange& scales, const SpaceTimeGrid& sg);

struct RefinedReport {
    DyadicInterval best_cell;
    double functional_value = 0.0;
    double theta = 1.0 / 3.0;
    double constant_estimate = 0.0;
    double extension_l6 = 0.0;
    double l2 = 0.0;
};

// sup over cells of m(c)^{-1} |tau|^{-1/2} ||E f_tau||_inf on the grid sg;
// m is the curve weight at the cell center
RefinedReport refined_functional(const CurveSpec& curve, const SampledFunction& f, const ScaleRange& scales,
                                 const SpaceTimeGrid& sg, double theta = 1.0 / 3.0);

// iid complex gaussian spectrum on [lo, hi], unit L^2 norm
SampledFunction random_band_input(const Grid1D& g, double lo, double hi, std::uint64_t seed);
// unit-norm gaussian packet of spatial width a, frequency v, centered at x0
SampledFunction packet_input(const Grid1D& g, double a, double v, double x0);
// smooth random spectrum supported inside the cell, unit L^2 norm
SampledFunction random_cell_input(const Grid1D& g, const DyadicInterval& cell, std::uint64_t seed);

struct DetectorConfig {
    CurveSpec curve = CurveSpec::inhom35();
    double L = 256.0;
    int n = 2048;
    double band = 8.0;      // random inputs on [-band, band]
    int n_random = 50;
    int n_concentrated = 10;
    double packet_width = 4.0;
    ScaleRange scales{-1, 2};
    double T = 0.05;
    int n_times = 64;
    double theta = 1.0 / 3.0;
    std::uint64_t seed = 1;
};

struct DetectorStudy {
    std::vector<RefinedReport> random, concentrated;
    double fitted_constant = 0.0; // max constant_estimate over all inputs
    double median_random = 0.0;
    double min_concentrated_over_median = 0.0;
    bool covered = false; // every input satisfies the inequality with the fitted constant
};

DetectorStudy run_detector_study(const DetectorConfig& cfg);

} // namespace strz
