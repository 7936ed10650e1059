#include "strichartz/two_profile.hpp"

#include <cmath>
#include <sstream>

namespace strz {

namespace {

SampledFunction second_component(const SampledFunction& g2, bool conjugate_second) {
    return conjugate_second ? g2.conj() : g2;
}

// exact frequency shift by a whole number of bins when N is on the grid,
// pointwise modulation otherwise
SampledFunction shift(const SampledFunction& f, double N) { return modulate(f, N); }

double wrong_side_fraction(const SampledFunction& f, int sign) {
    double total = 0, bad = 0;
    for (int k = 0; k < f.size(); ++k) {
        double m = std::norm(f.freq()[k]);
        total += m;
        double xi = f.grid().xi(k);
        if (sign > 0 ? xi < 0 : xi >= 0) bad += m;
    }
    return total > 0 ? bad / total : 0.0;
}

double max_extent(const SampledFunction& a, const SampledFunction& b, double rel) {
    return std::max(spectral_extent(a, rel), spectral_extent(b, rel));
}

} // namespace

TwoProfileBuild build_two_profile_checked(const TwoProfileInput& inp, bool conjugate_second) {
    if (inp.g1.grid() != inp.g2.grid()) throw DimensionError("two-profile components on different grids");
    const Grid1D& g = inp.g1.grid();
    if (!(inp.N > 0.0)) throw ValidationError("carrier N must be positive");
    if (inp.N >= 0.4 * g.xi_max()) throw ValidationError("carrier N beyond 0.4 of Nyquist");
    auto b1 = shift(inp.g1, inp.N);
    auto b2 = shift(second_component(inp.g2, conjugate_second), -inp.N);
    TwoProfileBuild out{b1 + b2, 0.0};
    out.overlap = std::max(wrong_side_fraction(b1, 1), wrong_side_fraction(b2, -1));
    check_band(out.f, "build_two_profile");
    return out;
}

SampledFunction build_two_profile(const TwoProfileInput& inp, bool conjugate_second) {
    return build_two_profile_checked(inp, conjugate_second).f;
}

double circle_average_sixth(double a, double b) {
    double a2 = a * a, b2 = b * b, s = a2 + b2;
    return s * s * s + 6 * a2 * b2 * s;
}

double schrodinger_coefficient(const CurveSpec& curve) {
    switch (curve.kind) {
    case CurveKind::HomOdd: return curve.ell * (curve.ell - 1) / 2.0;
    case CurveKind::Inhom35: return 10.0;
    default: throw ValidationError("homogenized limit needs a hom-odd or inhom35 curve");
    }
}

double schrodinger_norm(const SampledFunction& f, double c, const WindowConfig& w) {
    auto sg = SpaceTimeGrid::uniform(w.S / c, w.n_times, f.grid());
    check_band(f, "schrodinger_norm");
    return multiplier_lp_norm(Multiplier::of(CurveSpec::schrod(c, 1), f.grid(), false), f, sg, 6.0);
}

double homogenized_norm(const CurveSpec& curve, const SampledFunction& g1, const SampledFunction& g2,
                        bool conjugate_second, const WindowConfig& w) {
    const double c = schrodinger_coefficient(curve);
    if (g1.grid() != g2.grid()) throw DimensionError("grid mismatch");
    auto sg = SpaceTimeGrid::uniform(w.S / c, w.n_times, g1.grid());
    auto u1 = evolve(CurveSpec::schrod(c, 1), g1, sg);
    auto u2 = evolve(CurveSpec::schrod(c, -1), second_component(g2, conjugate_second), sg);
    Accumulator total;
    const int n = sg.spatial.n;
    for (int i = 0; i < sg.n_times; ++i) {
        Accumulator row;
        for (int j = 0; j < n; ++j) row.add(circle_average_sixth(std::abs(u1.row(i)[j]), std::abs(u2.row(i)[j])));
        total.add(row.value() * sg.weights[i]);
    }
    return std::pow(total.value() * sg.spatial.dx(), 1.0 / 6.0);
}

double carrier_coefficient(const CurveSpec& curve, double N) {
    return 0.5 * std::abs(curve.phase_d2(N));
}

double two_profile_norm_raw(const CurveSpec& curve, const TwoProfileInput& inp, bool conjugate_second,
                            const WindowConfig& w) {
    const Grid1D& g = inp.g1.grid();
    // |E f|^6 has six times the band of f; the grid sum is exact below 2 xi_max
    double W = max_extent(inp.g1, inp.g2, 1e-10);
    if (3 * (inp.N + W) >= g.xi_max()) {
        std::ostringstream os;
        os << "raw two-profile path aliases: 3(N+W) = " << 3 * (inp.N + W) << " >= xi_max = " << g.xi_max();
        throw AliasingError(os.str());
    }
    auto f = build_two_profile(inp, conjugate_second);
    auto sg = SpaceTimeGrid::uniform(w.S / carrier_coefficient(curve, inp.N), w.n_times, g);
    return extend_lp_norm(curve, f, sg, 6.0);
}

// E(e^{iNx}g1 + e^{-iNx}g2)(t, x) = N^{1/2}[e^{i Theta} A + e^{-i Theta} B](N^3 t, x + phi'(N) t)
// with A, B the approximate operators and Theta = N x' + omega t'. The N^{1/2}
// factor cancels against dt dx = dt' dx' / N^3 in the sixth power.
double two_profile_norm_approx(const TwoProfileInput& inp, bool conjugate_second, const WindowConfig& w) {
    const Grid1D& g = inp.g1.grid();
    const double N = inp.N;
    if (!(N > 0.0)) throw ValidationError("carrier N must be positive");
    double W = max_extent(inp.g1, inp.g2, 1e-10);
    if (6 * W >= 0.5 * g.xi_max()) throw AliasingError("approximate path: profile band too wide for the grid");
    const double omega = -2.0 - 4.0 * N * N;
    const double cprime = 10.0 + 3.0 / (N * N);
    auto sg = SpaceTimeGrid::uniform(w.S / cprime, w.n_times, g);
    auto A = approximate_op(N, 1, inp.g1, sg);
    auto B = approximate_op(N, -1, second_component(inp.g2, conjugate_second), sg);

    // e^{2ikNx} on the grid; harmonics beyond half Nyquist integrate to zero
    // against the band-limited Q_k and are dropped
    std::vector<cvec> carrier(4);
    bool active[4] = {false, false, false, false};
    for (int k = 1; k <= 3; ++k) {
        if (2 * k * N >= 0.5 * g.xi_max()) continue;
        active[k] = true;
        carrier[k].resize(g.n);
        for (int j = 0; j < g.n; ++j) carrier[k][j] = std::polar(1.0, 2 * k * N * g.x(j));
    }
    Accumulator total;
    for (int i = 0; i < sg.n_times; ++i) {
        const cplx* a_row = A.row(i);
        const cplx* b_row = B.row(i);
        Accumulator base, re[4], im[4];
        for (int j = 0; j < g.n; ++j) {
            cplx z = a_row[j] * std::conj(b_row[j]);
            double a = std::norm(a_row[j]) + std::norm(b_row[j]);
            double z2 = std::norm(z);
            base.add(a * a * a + 6 * a * z2);
            cplx q[4] = {0.0, z * (3 * a * a + 3 * z2), 3 * a * z * z, z * z * z};
            for (int k = 1; k <= 3; ++k) {
                if (!active[k]) continue;
                cplx v = carrier[k][j] * q[k];
                re[k].add(v.real());
                im[k].add(v.imag());
            }
        }
        double slice = base.value();
        const double tp = sg.times[i];
        for (int k = 1; k <= 3; ++k) {
            if (!active[k]) continue;
            slice += 2.0 * (std::polar(1.0, 2 * k * omega * tp) * cplx(re[k].value(), im[k].value())).real();
        }
        total.add(slice * sg.weights[i]);
    }
    double v = total.value() * g.dx();
    if (v < 0) throw NumericError("negative sixth power in approximate two-profile path");
    return std::pow(v, 1.0 / 6.0);
}

SweepResult sweep_two_profile(const CurveSpec& curve, const SampledFunction& g1, const SampledFunction& g2,
                              const std::vector<double>& N_list, bool conjugate_second, const WindowConfig& w,
                              SweepPath path) {
    if (N_list.empty()) throw ValidationError("empty carrier list");
    SweepResult r;
    r.limit_prediction = homogenized_norm(curve, g1, g2, conjugate_second, w);
    r.schrodinger_reference = schrodinger_norm(g1, 1.0, w);
    for (double N : N_list) {
        TwoProfileInput inp{g1, g2, N};
        auto built = build_two_profile_checked(inp, conjugate_second);
        SweepPath p = path;
        if (p == SweepPath::Auto) p = curve.kind == CurveKind::Inhom35 ? SweepPath::Approx : SweepPath::Raw;
        if (p == SweepPath::Approx && curve.kind != CurveKind::Inhom35)
            throw ValidationError("approximate path exists only for inhom35");
        double v = p == SweepPath::Raw ? two_profile_norm_raw(curve, inp, conjugate_second, w)
                                       : two_profile_norm_approx(inp, conjugate_second, w);
        r.N_values.push_back(N);
        r.norms.push_back(v);
        r.relative_gaps.push_back(std::abs(v - r.limit_prediction) / r.limit_prediction);
        r.overlaps.push_back(built.overlap);
        r.paths.push_back(p == SweepPath::Raw ? "raw" : "approx");
    }
    return r;
}

double asymptotic_schrodinger_gap(double N, int sign, const SampledFunction& f, const SpaceTimeGrid& sg) {
    auto A = approximate_op(N, sign, f, sg);
    auto S = evolve(CurveSpec::schrod(10.0, sign), f, sg);
    for (std::size_t i = 0; i < A.values.size(); ++i) A.values[i] -= S.values[i];
    return lp_spacetime_norm(A, 6.0);
}

} // namespace strz
