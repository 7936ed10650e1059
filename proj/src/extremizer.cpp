#include "strichartz/extremizer.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace strz {

namespace {

void check_unit(const SampledFunction& f, const char* where) {
    double nrm = l2_norm(f);
    if (!std::isfinite(nrm)) throw NumericError(std::string(where) + ": non-finite input");
    if (std::abs(nrm - 1.0) > 1e-8) {
        std::ostringstream os;
        os << where << ": input must have unit L2 norm, got " << nrm;
        throw ValidationError(os.str());
    }
}

// Tabulated w(xi) e^{i t phi(xi)} restricted to the band mask, one row per slice.
class Propagator {
public:
    Propagator(const CurveSpec& curve, const Grid1D& g, const AscentConfig& cfg)
        : sg_(ascent_grid(g, cfg)), n_(g.n) {
        Multiplier m = Multiplier::of(curve, g, true);
        const double dt = sg_.dt();
        keep_.assign(n_, false);
        for (int k = 0; k < n_; ++k) keep_[k] = std::abs(m.phase[k]) * dt <= cfg.mask_level;
        table_.assign(static_cast<std::size_t>(sg_.n_times) * n_, 0.0);
        for (int i = 0; i < sg_.n_times; ++i) {
            const double t = sg_.times[i];
            cplx* row = table_.data() + static_cast<std::size_t>(i) * n_;
            for (int k = 0; k < n_; ++k) {
                if (!keep_[k]) continue;
                double a = t * m.phase[k];
                row[k] = m.weight[k] * cplx(std::cos(a), std::sin(a));
            }
        }
    }

    SampledFunction mask(const SampledFunction& f) const {
        cvec hat = f.freq();
        for (int k = 0; k < n_; ++k)
            if (!keep_[k]) hat[k] = 0.0;
        return SampledFunction::from_freq(f.grid(), std::move(hat));
    }

    // masked E*(|Ef|^4 Ef) and the sixth power of ||Ef||_6
    SampledFunction gradient_field(const SampledFunction& f, double& sixth) const {
        const Grid1D& g = f.grid();
        std::vector<Accumulator> re(n_), im(n_);
        Accumulator total;
        cvec buf(n_);
        for (int i = 0; i < sg_.n_times; ++i) {
            const cplx* row = table_.data() + static_cast<std::size_t>(i) * n_;
            for (int k = 0; k < n_; ++k) buf[k] = f.freq()[k] * row[k];
            buf = to_space(g, buf);
            Accumulator slice;
            for (int j = 0; j < n_; ++j) {
                double a2 = std::norm(buf[j]);
                slice.add(a2 * a2 * a2);
                buf[j] *= a2 * a2;
            }
            total.add(slice.value() * sg_.weights[i]);
            buf = to_freq(g, buf);
            const double w = sg_.weights[i];
            for (int k = 0; k < n_; ++k) {
                if (!keep_[k]) continue;
                cplx v = buf[k] * std::conj(row[k]) * w;
                re[k].add(v.real());
                im[k].add(v.imag());
            }
        }
        sixth = total.value() * g.dx();
        cvec out(n_);
        for (int k = 0; k < n_; ++k) out[k] = cplx(re[k].value(), im[k].value());
        return SampledFunction::from_freq(g, std::move(out));
    }

    SampledFunction step(const SampledFunction& f, double& quotient) const {
        double sixth = 0.0;
        SampledFunction g = gradient_field(f, sixth);
        quotient = std::pow(sixth, 1.0 / 6.0) / l2_norm(f);
        if (!std::isfinite(quotient)) throw NumericError("ascent_step: non-finite quotient");
        double nrm = l2_norm(g);
        if (!std::isfinite(nrm)) throw NumericError("ascent_step: non-finite iterate");
        // unmasked, <g, f> = ||Ef||_6^6, so this compares against the full image
        if (nrm == 0.0 || nrm * l2_norm(f) <= 1e-12 * sixth) throw NumericError("ascent_step: Euler-Lagrange image vanishes on the band mask");
        return g.scaled(1.0 / nrm);
    }

private:
    SpaceTimeGrid sg_;
    int n_;
    std::vector<bool> keep_;
    cvec table_;
};

double sixth_power(const CurveSpec& curve, const SampledFunction& f, const SpaceTimeGrid& sg) {
    return std::pow(extend_lp_norm(curve, f, sg, 6.0), 6.0);
}

} // namespace

SpaceTimeGrid ascent_grid(const Grid1D& g, const AscentConfig& cfg) {
    if (!(cfg.T > 0) || cfg.n_times < 1) throw ValidationError("ascent grid needs T > 0 and n_times >= 1");
    if (!(cfg.mask_level > 0)) throw ValidationError("mask level must be positive");
    return SpaceTimeGrid::uniform(cfg.T, cfg.n_times, g);
}

SampledFunction apply_band_mask(const CurveSpec& curve, const SampledFunction& f, const AscentConfig& cfg) {
    const Grid1D& g = f.grid();
    const double dt = ascent_grid(g, cfg).dt();
    cvec hat = f.freq();
    for (int k = 0; k < g.n; ++k)
        if (std::abs(curve.phase(g.xi(k))) * dt > cfg.mask_level) hat[k] = 0.0;
    return SampledFunction::from_freq(g, std::move(hat));
}

double band_mask_limit(const CurveSpec& curve, const AscentConfig& cfg) {
    // phases grow in |xi| for every supported curve; bisect on the continuum
    const double dt = 2.0 * cfg.T / cfg.n_times;
    auto ok = [&](double x) { return std::max(std::abs(curve.phase(x)), std::abs(curve.phase(-x))) * dt <= cfg.mask_level; };
    double lo = 0.0, hi = 1.0;
    while (ok(hi) && hi < 1e12) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

double strichartz_quotient(const CurveSpec& curve, const SampledFunction& f, const AscentConfig& cfg) {
    double nrm = l2_norm(f);
    if (nrm == 0.0) return 0.0;
    return extend_lp_norm(curve, f, ascent_grid(f.grid(), cfg), 6.0) / nrm;
}

SampledFunction ascent_step(const CurveSpec& curve, const SampledFunction& f, const AscentConfig& cfg,
                            double* quotient) {
    check_unit(f, "ascent_step");
    Propagator prop(curve, f.grid(), cfg);
    double q = 0.0;
    SampledFunction next = prop.step(f, q);
    if (quotient) *quotient = q;
    return next;
}

AscentState search_extremizer(const CurveSpec& curve, const SampledFunction& f0, int max_iter, double tol,
                              const AscentConfig& cfg) {
    check_unit(f0, "search_extremizer");
    if (max_iter < 0) throw ValidationError("max_iter must be non-negative");
    if (!(tol >= 0)) throw ValidationError("tol must be non-negative");
    Propagator prop(curve, f0.grid(), cfg);
    SampledFunction f = prop.mask(f0);
    double nrm = l2_norm(f);
    if (nrm == 0.0) throw NumericError("search_extremizer: start vanishes on the band mask");
    f = f.scaled(1.0 / nrm);

    AscentState st;
    double q = 0.0;
    SampledFunction next = prop.step(f, q);
    st.trace.push_back(q);
    while (st.iteration < max_iter) {
        double qn = 0.0;
        SampledFunction after = prop.step(next, qn);
        f = std::move(next);
        next = std::move(after);
        ++st.iteration;
        st.trace.push_back(qn);
        if (std::abs(qn - q) < tol) {
            st.converged = true;
            q = qn;
            break;
        }
        q = qn;
    }
    st.f = std::move(f);
    st.quotient = q;
    return st;
}

GradientCheck gradient_check(const CurveSpec& curve, const SampledFunction& f, int n_directions,
                             std::uint64_t seed, const AscentConfig& cfg) {
    if (n_directions < 1) throw ValidationError("need at least one direction");
    const Grid1D& g = f.grid();
    const SpaceTimeGrid sg = ascent_grid(g, cfg);
    SpaceTimeField F = extend(curve, f, sg);
    for (auto& v : F.values) {
        double a2 = std::norm(v);
        v *= a2 * a2;
    }
    SampledFunction grad = extend_adjoint(curve, F).scaled(6.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    GradientCheck out;
    for (int d = 0; d < n_directions; ++d) {
        cvec hat(g.n, 0.0);
        for (int k = 0; k < g.n; ++k) hat[k] = cplx(nd(rng), nd(rng));
        SampledFunction h = apply_band_mask(curve, SampledFunction::from_freq(g, hat), cfg);
        h = h.scaled(1.0 / l2_norm(h));
        const double analytic = inner(h, grad).real();
        for (int s = 0; s < 2; ++s) {
            const double eps = s == 0 ? 1e-5 : 1e-6;
            double up = sixth_power(curve, f + h.scaled(eps), sg);
            double dn = sixth_power(curve, f - h.scaled(eps), sg);
            double fd = (up - dn) / (2 * eps);
            double scale = std::max(std::abs(analytic), std::abs(fd));
            double err = scale == 0.0 ? 0.0 : std::abs(fd - analytic) / scale;
            double& slot = s == 0 ? out.error_coarse : out.error_fine;
            slot = std::max(slot, err);
        }
    }
    return out;
}

double gaussian_schrodinger_quotient(double a, double c, double T) {
    if (!(a > 0) || !(c > 0) || !(T > 0)) throw ValidationError("gaussian quotient needs a, c, T > 0");
    // ||u(t)||_6^6 = sqrt(pi/3) a^5 / (a^4 + 4 c^2 t^2), ||f||_2^2 = a sqrt(pi)
    double q6 = std::atan(2 * c * T / (a * a)) / (c * std::numbers::pi * std::sqrt(3.0));
    return std::pow(q6, 1.0 / 6.0);
}

double gaussian_schrodinger_quotient_full() { return std::pow(12.0, -1.0 / 12.0); }

double threshold_factor(const CurveSpec& curve) {
    switch (curve.kind) {
    case CurveKind::HomOdd: return std::pow(5.0 / (curve.ell * (curve.ell - 1.0)), 1.0 / 6.0);
    case CurveKind::Inhom35: return std::pow(2.0, -1.0 / 3.0);
    default: throw ValidationError("threshold needs a hom-odd or inhom35 curve");
    }
}

ThresholdReport threshold_report(const CurveSpec& curve, const ThresholdConfig& cfg) {
    ThresholdReport rep;
    rep.curve = curve;
    rep.factor = threshold_factor(curve);
    if (cfg.restarts < 1) throw ValidationError("need at least one restart");
    const Grid1D g = Grid1D::make(cfg.L, cfg.n);
    auto gaussian = [&](double a) {
        cvec s(g.n);
        for (int j = 0; j < g.n; ++j) s[j] = std::exp(-g.x(j) * g.x(j) / (2 * a * a));
        SampledFunction f = SampledFunction::from_space(g, std::move(s));
        return f.scaled(1.0 / l2_norm(f));
    };
    const SampledFunction g0 = gaussian(cfg.gaussian_width);

    AscentState s2 = search_extremizer(CurveSpec::schrod(1.0, 1), g0, cfg.max_iter, cfg.tol, cfg.ascent);
    rep.schrodinger_search = s2.quotient;
    rep.schrodinger_oracle = gaussian_schrodinger_quotient_full();
    rep.schrodinger_M2 = rep.schrodinger_search;
    double disagreement = std::abs(rep.schrodinger_search / rep.schrodinger_oracle - 1.0);
    if (disagreement > 0.01) {
        rep.schrodinger_M2 = rep.schrodinger_oracle;
        rep.m2_from_oracle = true;
        std::ostringstream os;
        os << "schrodinger search " << rep.schrodinger_search << " differs from the gaussian oracle by "
           << disagreement << "; using the oracle";
        rep.notes.push_back(os.str());
    }
    rep.threshold = rep.factor * rep.schrodinger_M2;

    // restarts: perturbed gaussians of varying width
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    for (int r = 0; r < cfg.restarts; ++r) {
        SampledFunction start = gaussian(cfg.gaussian_width * (1.0 + 0.25 * r));
        if (r > 0) {
            cvec hat = start.freq();
            for (auto& v : hat) v += 0.05 * std::abs(v) * cplx(nd(rng), nd(rng));
            start = SampledFunction::from_freq(g, std::move(hat));
        }
        start = apply_band_mask(curve, start, cfg.ascent);
        start = start.scaled(1.0 / l2_norm(start));
        AscentState st = search_extremizer(curve, start, cfg.max_iter, cfg.tol, cfg.ascent);
        rep.restart_M.push_back(st.quotient);
    }
    double lo = rep.restart_M.front(), hi = lo;
    for (double v : rep.restart_M) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.search_M = hi;
    rep.multimodal = hi > 1.02 * lo;
    if (rep.multimodal) rep.notes.push_back("restarts disagree by more than 2%");

    rep.two_profile_M = homogenized_norm(curve, g0, g0, true, cfg.window) / (std::sqrt(2.0) * l2_norm(g0));
    rep.two_profile_rel_gap = std::abs(rep.two_profile_M / rep.threshold - 1.0);
    rep.lower_bound_M = std::max(rep.search_M, rep.two_profile_M);
    rep.verdict = rep.lower_bound_M > rep.threshold * (1.0 + 3.0 * cfg.tolerance) ? "above" : "inconclusive";
    return rep;
}

} // namespace strz
