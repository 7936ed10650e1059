#include "strichartz/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"

namespace strz {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

Grid1D Grid1D::make(double L, int n) {
    if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("grid half-width L must be positive");
    if (n < 16 || !is_pow2(n)) throw ValidationError("grid size must be a power of two >= 16");
    return Grid1D{L, n};
}

double Grid1D::dxi() const { return std::numbers::pi / L; }
double Grid1D::xi_max() const { return std::numbers::pi / dx(); }

double Grid1D::xi(int k) const {
    int kk = k < n / 2 ? k : k - n;
    return kk * dxi();
}

int Grid1D::index_of_xi(double v) const {
    long m = std::lround(v / dxi());
    long r = ((m % n) + n) % n;
    return static_cast<int>(r);
}

// x_j = -L + j dx, so e^{-i x_j xi_k} = (-1)^k e^{-2 pi i jk/n}.
cvec to_freq(const Grid1D& g, const cvec& space) {
    if (static_cast<int>(space.size()) != g.n) throw DimensionError("sample count does not match grid");
    cvec out(space);
    detail::FftPlans::instance().forward(out.data(), g.n);
    const double dx = g.dx();
    for (int k = 0; k < g.n; ++k) out[k] *= (k & 1) ? -dx : dx;
    return out;
}

cvec to_space(const Grid1D& g, const cvec& freq) {
    if (static_cast<int>(freq.size()) != g.n) throw DimensionError("sample count does not match grid");
    cvec out(freq);
    for (int k = 0; k < g.n; ++k)
        if (k & 1) out[k] = -out[k];
    detail::FftPlans::instance().backward(out.data(), g.n);
    const double s = 1.0 / (g.n * g.dx());
    for (auto& v : out) v *= s;
    return out;
}

SampledFunction SampledFunction::from_space(const Grid1D& g, cvec space) {
    if (static_cast<int>(space.size()) != g.n) throw DimensionError("sample count does not match grid");
    SampledFunction f;
    f.grid_ = g;
    f.freq_ = to_freq(g, space);
    f.space_ = std::move(space);
    return f;
}

SampledFunction SampledFunction::from_freq(const Grid1D& g, cvec freq) {
    if (static_cast<int>(freq.size()) != g.n) throw DimensionError("sample count does not match grid");
    SampledFunction f;
    f.grid_ = g;
    f.space_ = to_space(g, freq);
    f.freq_ = std::move(freq);
    return f;
}

SampledFunction SampledFunction::zero(const Grid1D& g) {
    SampledFunction f;
    f.grid_ = g;
    f.space_.assign(g.n, 0.0);
    f.freq_.assign(g.n, 0.0);
    return f;
}

SampledFunction SampledFunction::conj() const {
    cvec s(space_);
    for (auto& v : s) v = std::conj(v);
    return from_space(grid_, std::move(s));
}

SampledFunction SampledFunction::scaled(cplx a) const {
    SampledFunction f(*this);
    for (auto& v : f.space_) v *= a;
    for (auto& v : f.freq_) v *= a;
    return f;
}

SampledFunction SampledFunction::operator+(const SampledFunction& o) const {
    if (grid_ != o.grid_) throw DimensionError("grid mismatch");
    SampledFunction f(*this);
    for (int i = 0; i < grid_.n; ++i) {
        f.space_[i] += o.space_[i];
        f.freq_[i] += o.freq_[i];
    }
    return f;
}

SampledFunction SampledFunction::operator-(const SampledFunction& o) const {
    return *this + o.scaled(-1.0);
}

SampledFunction make_sampled(const Grid1D& g, const cvec& space_samples) {
    return SampledFunction::from_space(g, space_samples);
}

double l2_norm(const SampledFunction& f) {
    Accumulator acc;
    for (const auto& v : f.space()) acc.add(std::norm(v));
    return std::sqrt(acc.value() * f.grid().dx());
}

double l2_norm_freq(const SampledFunction& f) {
    Accumulator acc;
    for (const auto& v : f.freq()) acc.add(std::norm(v));
    return std::sqrt(acc.value() * f.grid().dxi() / (2.0 * std::numbers::pi));
}

cplx inner(const SampledFunction& f, const SampledFunction& g) {
    if (f.grid() != g.grid()) throw DimensionError("grid mismatch");
    Accumulator re, im;
    for (int i = 0; i < f.size(); ++i) {
        cplx v = f.space()[i] * std::conj(g.space()[i]);
        re.add(v.real());
        im.add(v.imag());
    }
    return cplx(re.value(), im.value()) * f.grid().dx();
}

double spectral_extent(const SampledFunction& f, double rel) {
    double mx = 0.0;
    for (const auto& v : f.freq()) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) return 0.0;
    double ext = 0.0;
    for (int k = 0; k < f.size(); ++k)
        if (std::abs(f.freq()[k]) > rel * mx) ext = std::max(ext, std::abs(f.grid().xi(k)));
    return ext;
}

void check_band(const SampledFunction& f, const char* where, double frac) {
    double ext = spectral_extent(f);
    if (ext >= frac * f.grid().xi_max()) {
        std::ostringstream os;
        os << where << ": spectrum reaches |xi| = " << ext << ", beyond " << frac
           << " of Nyquist " << f.grid().xi_max();
        throw AliasingError(os.str());
    }
}

SpaceTimeGrid SpaceTimeGrid::uniform(double T, int n_times, const Grid1D& g) {
    if (!(T > 0.0)) throw ValidationError("time half-extent must be positive");
    if (n_times < 8) throw ValidationError("need at least 8 time slices");
    SpaceTimeGrid s;
    s.T = T;
    s.n_times = n_times;
    s.spatial = g;
    const double dt = 2.0 * T / n_times;
    s.times.resize(n_times);
    s.weights.assign(n_times, dt);
    for (int i = 0; i < n_times; ++i) s.times[i] = -T + (i + 0.5) * dt;
    return s;
}

SpaceTimeGrid SpaceTimeGrid::instants(std::vector<double> ts, const Grid1D& g) {
    if (ts.empty()) throw ValidationError("empty time list");
    SpaceTimeGrid s;
    s.spatial = g;
    s.n_times = static_cast<int>(ts.size());
    double tmax = 0.0;
    for (double t : ts) tmax = std::max(tmax, std::abs(t));
    s.T = tmax;
    s.times = std::move(ts);
    s.weights.assign(s.n_times, 1.0);
    return s;
}

double pow_abs(double a, double p) {
    a = std::abs(a);
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 6.0) {
        double a2 = a * a;
        return a2 * a2 * a2;
    }
    if (p == 1.0) return a;
    return std::pow(a, p);
}

double lp_spacetime_norm(const SpaceTimeField& F, double p) {
    if (!(p >= 1.0)) throw ValidationError("p must be >= 1");
    const auto& sg = F.stgrid;
    const int n = sg.spatial.n;
    if (std::isinf(p)) {
        double mx = 0.0;
        for (const auto& v : F.values) mx = std::max(mx, std::abs(v));
        return mx;
    }
    Accumulator total;
    for (int i = 0; i < sg.n_times; ++i) {
        Accumulator row;
        const cplx* r = F.row(i);
        for (int j = 0; j < n; ++j) row.add(pow_abs(std::abs(r[j]), p));
        total.add(row.value() * sg.weights[i]);
    }
    return std::pow(total.value() * sg.spatial.dx(), 1.0 / p);
}

double bilinear_l3_norm(const SpaceTimeField& F, const SpaceTimeField& G) {
    if (!(F.stgrid == G.stgrid)) throw DimensionError("space-time grid mismatch");
    const auto& sg = F.stgrid;
    Accumulator total;
    for (int i = 0; i < sg.n_times; ++i) {
        Accumulator row;
        const cplx* a = F.row(i);
        const cplx* b = G.row(i);
        for (int j = 0; j < sg.spatial.n; ++j) row.add(pow_abs(std::abs(a[j]) * std::abs(b[j]), 3.0));
        total.add(row.value() * sg.weights[i]);
    }
    return std::cbrt(total.value() * sg.spatial.dx());
}

double windowed_l2(const SpaceTimeField& F, const SampledFunction& window) {
    const auto& sg = F.stgrid;
    if (window.grid() != sg.spatial) throw DimensionError("window grid mismatch");
    for (const auto& w : window.space())
        if (w.real() < 0.0 || std::abs(w.imag()) > 1e-14 * (1.0 + std::abs(w.real())))
            throw ValidationError("window must be nonnegative and real");
    Accumulator total;
    for (int i = 0; i < sg.n_times; ++i) {
        Accumulator row;
        const cplx* r = F.row(i);
        for (int j = 0; j < sg.spatial.n; ++j) row.add(window.space()[j].real() * std::norm(r[j]));
        total.add(row.value() * sg.weights[i]);
    }
    return std::sqrt(total.value() * sg.spatial.dx());
}

void check_finite(const SpaceTimeField& F) {
    for (const auto& v : F.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericError("non-finite value in space-time field");
}

} // namespace strz
