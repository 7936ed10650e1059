#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "strichartz/curves.hpp"

namespace strz {

// [k 2^j, (k+1) 2^j)
struct DyadicInterval {
    int j = 0;
    std::int64_t k = 0;

    double length() const;
    double lo() const;
    double hi() const;
    double center() const;
    DyadicInterval parent(int m = 1) const { return {j + m, k >> m}; }
    bool operator==(const DyadicInterval&) const = default;
};

struct OddCoefficients {
    int ell = 3;
    std::vector<std::int64_t> b; // b_0 .. b_{2k-2}
    int max_index = 0;           // 2 floor(k/2)
};

// exact division of 2^{l-1}(x^l + y^l) - (x+y)^l by (x-y)^2 (x+y)
OddCoefficients p_coefficients(int ell);
// the closed recursion for the same coefficients
std::vector<std::int64_t> p_coefficients_recursive(int ell);

double adjacency_lhs(int ell, int N);  // left side of the depth condition
double adjacency_rhs(int ell);         // 2^l l(l-1)
int min_adjacency_depth(int ell);

bool adjacent(const DyadicInterval& a, const DyadicInterval& b);
bool whitney_related(const DyadicInterval& tau, const DyadicInterval& taup, int depth);

struct DyadicBoundsReport {
    bool point_bound = false;      // |xi| <= 2|c_tau|
    bool center_ratio = false;     // |c_tau'| <= (2^{d+2}-1)|c_tau|
    bool sum_bounds = false;       // |xi + xi'| within the c(tau+tau') sandwich
    bool difference_bounds = false; // 2^{d-1}|tau| <= |xi - xi'| <= 2^{d+1}|tau|
    bool all() const { return point_bound && center_ratio && sum_bounds && difference_bounds; }
};

DyadicBoundsReport dyadic_bounds_check(const DyadicInterval& tau, const DyadicInterval& taup, int depth,
                                       int samples = 33);

// Band constants A, B are dimensionless: G = (omega - K1 eta - K0) / D.
enum class BandRule {
    Corrected, // upper bound from |xi - xi'| <= 2^{d+1}|tau|
    Literal,   // the constant exactly as displayed in the source derivation
};

struct Parallelogram {
    double c = 0.0;      // center of J
    double length = 0.0; // |J|
    double K1 = 0.0, K0 = 0.0, D = 1.0;
    double A = 0.0, B = 0.0;
    double beta = 0.0;

    double G(double omega, double eta) const { return (omega - K1 * eta - K0) / D; }
    // dilated ranges
    double eta_lo() const { return c - (1 + beta) * length / 2; }
    double eta_hi() const { return c + (1 + beta) * length / 2; }
    double g_lo() const { return A - (B - A) * beta / 2; }
    double g_hi() const { return B + (B - A) * beta / 2; }
};

struct Band {
    double A = 0.0, B = 0.0;
};
Band band_constants(const CurveSpec& curve, int depth, BandRule rule = BandRule::Corrected);

Parallelogram build_parallelogram(double J_lo, double J_hi, const CurveSpec& curve, int depth, double beta,
                                  BandRule rule = BandRule::Corrected);

// omega - K1 eta - K0 for omega = phi(xi) + phi(xi'), eta = xi + xi', evaluated
// without the cancellation of the direct form
double offset_from_tangent(const CurveSpec& curve, double c, double xi, double xip);

bool containment_check(const DyadicInterval& tau, const DyadicInterval& taup, const CurveSpec& curve, int depth,
                       int samples, BandRule rule = BandRule::Corrected);
bool containment_check_band(const DyadicInterval& tau, const DyadicInterval& taup, const CurveSpec& curve,
                            int depth, int samples, Band band);

// largest beta <= 1 meeting the two dilation inequalities with A/9 slack
double select_beta(const CurveSpec& curve, int depth);

bool parallelograms_intersect(const Parallelogram& a, const Parallelogram& b, double slack = 1e-12);

struct CoverWindow {
    int j_min = 0, j_max = 4;
    double freq_lo = 1.0, freq_hi = 4096.0; // both intervals of a pair lie inside
};

struct CoverReport {
    long long pairs = 0;
    long long multiplicity = 0;
    DyadicInterval argmax_tau, argmax_taup;
};

CoverReport cover_multiplicity(const CurveSpec& curve, int depth, double beta, const CoverWindow& w);

// Whitney partners of tau inside the neighbouring depth-parent on one side
std::vector<DyadicInterval> whitney_partners(const DyadicInterval& tau, int depth, int side = 1);

// random Whitney pairs on the positive half-line, tau of length 2^j with j in [j_lo, j_hi]
std::vector<std::pair<DyadicInterval, DyadicInterval>> sample_whitney_pairs(int depth, int count, std::uint64_t seed,
                                                                            int j_lo, int j_hi);

} // namespace strz
