#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace strz {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : ValidationError {
    using ValidationError::ValidationError;
};
// aliasing, NaN/Inf, degenerate iterates
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AliasingError : NumericError {
    using NumericError::NumericError;
};

// Uniform periodic grid on [-L, L). Frequencies are kept in FFT order.
struct Grid1D {
    double L = 64.0;
    int n = 4096;

    static Grid1D make(double L, int n);

    double dx() const { return 2.0 * L / n; }
    double dxi() const;
    double xi_max() const;
    double x(int j) const { return -L + j * dx(); }
    double xi(int k) const;
    int index_of_xi(double xi) const; // nearest bin, FFT order
    bool operator==(const Grid1D& o) const { return L == o.L && n == o.n; }
    bool operator!=(const Grid1D& o) const { return !(*this == o); }
};

class SampledFunction {
public:
    SampledFunction() = default;
    static SampledFunction from_space(const Grid1D& g, cvec space);
    static SampledFunction from_freq(const Grid1D& g, cvec freq);
    static SampledFunction zero(const Grid1D& g);

    const Grid1D& grid() const { return grid_; }
    const cvec& space() const { return space_; }
    const cvec& freq() const { return freq_; }
    int size() const { return grid_.n; }

    SampledFunction conj() const;
    SampledFunction scaled(cplx a) const;
    SampledFunction operator+(const SampledFunction& o) const;
    SampledFunction operator-(const SampledFunction& o) const;

private:
    Grid1D grid_;
    cvec space_;
    cvec freq_;
};

SampledFunction make_sampled(const Grid1D& g, const cvec& space_samples);

// continuum normalisation: fhat(xi) = int f e^{-ix xi} dx
cvec to_freq(const Grid1D& g, const cvec& space);
cvec to_space(const Grid1D& g, const cvec& freq);

double l2_norm(const SampledFunction& f);
double l2_norm_freq(const SampledFunction& f);
cplx inner(const SampledFunction& f, const SampledFunction& g); // int f conj(g)

// largest |xi| at which |fhat| exceeds rel * max|fhat|; 0 for the zero function
double spectral_extent(const SampledFunction& f, double rel = 1e-12);
void check_band(const SampledFunction& f, const char* where, double frac = 0.8);

struct SpaceTimeGrid {
    double T = 8.0;
    int n_times = 0;
    Grid1D spatial;
    std::vector<double> times;
    std::vector<double> weights; // dt per slice

    // midpoint rule on [-T, T]
    static SpaceTimeGrid uniform(double T, int n_times, const Grid1D& g);
    // explicit sampling instants, unit weights (for single-time evaluation)
    static SpaceTimeGrid instants(std::vector<double> ts, const Grid1D& g);

    double dt() const { return n_times ? 2.0 * T / n_times : 0.0; }
    bool operator==(const SpaceTimeGrid& o) const {
        return spatial == o.spatial && times == o.times && weights == o.weights;
    }
};

struct SpaceTimeField {
    SpaceTimeGrid stgrid;
    cvec values; // row-major n_times x n_points

    cplx* row(int i) { return values.data() + static_cast<std::size_t>(i) * stgrid.spatial.n; }
    const cplx* row(int i) const {
        return values.data() + static_cast<std::size_t>(i) * stgrid.spatial.n;
    }
};

double lp_spacetime_norm(const SpaceTimeField& F, double p);
double bilinear_l3_norm(const SpaceTimeField& F, const SpaceTimeField& G);
double windowed_l2(const SpaceTimeField& F, const SampledFunction& window);
void check_finite(const SpaceTimeField& F);

// Deterministic accumulation (Neumaier).
class Accumulator {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            c_ += (sum_ - t) + v;
        else
            c_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0, c_ = 0.0;
};

double pow_abs(double a, double p); // |a|^p with integer fast paths

} // namespace strz
