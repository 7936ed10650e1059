#include "strichartz/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace strz {

namespace {

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

bool inhom(OrthoMode m) { return m == OrthoMode::OddInhom35 || m == OrthoMode::EvenInhom35; }
bool odd(OrthoMode m) { return m == OrthoMode::OddHom || m == OrthoMode::OddInhom35; }

// |dx/h - dt phi'(h xi)/h^a ...| + |dt (h xi)^{a-2} / h^a| and the zero-carrier form
double moving_display(OrthoMode mode, double alpha, double h, double xi, double dx, double dt) {
    const double c = h * xi;
    if (inhom(mode)) {
        double h3 = h * h * h, h5 = h3 * h * h;
        return std::abs(dx / h - 3 * dt * c * c / h3 - 5 * dt * c * c * c * c / h5) + std::abs(dt * c * c * c / h5);
    }
    double ha = std::pow(h, alpha);
    return std::abs(dx / h - dt * alpha * std::pow(c, alpha - 1) / ha) + std::abs(dt * std::pow(c, alpha - 2) / ha);
}

double still_display(OrthoMode mode, double alpha, double h, double dx, double dt) {
    if (inhom(mode)) return std::abs(dx / h) + std::abs(dt / (h * h * h)) + std::abs(dt / std::pow(h, 5));
    return std::abs(dx / h) + std::abs(dt / std::pow(h, alpha));
}

// keep bins within halfwidth of 0 that are connected to the strongest one
SampledFunction spectral_window(const SampledFunction& f, double halfwidth) {
    const Grid1D& g = f.grid();
    const int n = g.n;
    // natural frequency order: index m <-> bin (m + n/2) mod n
    auto bin = [&](int m) { return (m + n / 2) % n; };
    int best = -1;
    double peak = 0.0;
    for (int m = 0; m < n; ++m) {
        int k = bin(m);
        if (std::abs(g.xi(k)) > halfwidth) continue;
        double a = std::abs(f.freq()[k]);
        if (a > peak) peak = a, best = m;
    }
    cvec hat(n, 0.0);
    if (best < 0) return SampledFunction::from_freq(g, std::move(hat));
    const double floor = 1e-8 * peak;
    auto keep = [&](int m) {
        int k = bin(m);
        return std::abs(g.xi(k)) <= halfwidth && std::abs(f.freq()[k]) > floor;
    };
    int lo = best, hi = best;
    while (lo > 0 && keep(lo - 1)) --lo;
    while (hi < n - 1 && keep(hi + 1)) ++hi;
    for (int m = lo; m <= hi; ++m) hat[bin(m)] = f.freq()[bin(m)];
    return SampledFunction::from_freq(g, std::move(hat));
}

SampledFunction hard_lowpass(const SampledFunction& f, double cutoff) {
    cvec hat(f.freq());
    for (int k = 0; k < f.size(); ++k)
        if (std::abs(f.grid().xi(k)) > cutoff) hat[k] = 0.0;
    return SampledFunction::from_freq(f.grid(), std::move(hat));
}

// cut at the first valley on each side of x = 0 with a cos^2 taper
SampledFunction spatial_cut(const SampledFunction& f) {
    const Grid1D& g = f.grid();
    const int n = g.n, c = n / 2; // x_c = 0
    std::vector<double> a(n);
    double peak = 0.0;
    for (int j = 0; j < n; ++j) peak = std::max(peak, a[j] = std::abs(f.space()[j]));
    if (peak == 0.0) return f;
    auto find_cut = [&](int dir) {
        int run = c;
        for (int j = c; j >= 0 && j < n; j += dir) {
            if (a[j] < a[run]) run = j;
            if (a[run] < 0.5 * peak && a[j] > 2 * a[run] + 1e-3 * peak) return run;
        }
        return -1;
    };
    cvec s(f.space());
    for (int dir : {1, -1}) {
        int cut = find_cut(dir);
        if (cut < 0) continue;
        const int d = std::abs(cut - c), w = std::max(1, d / 4);
        for (int j = c; j >= 0 && j < n; j += dir) {
            int r = std::abs(j - c);
            if (r >= d)
                s[j] = 0.0;
            else if (r > d - w) {
                double u = std::cos(0.5 * M_PI * (r - (d - w)) / double(w));
                s[j] *= u * u;
            }
        }
    }
    return SampledFunction::from_space(g, std::move(s));
}

// inverse profile operator with the carrier removed before compression
SampledFunction to_profile_frame(const CurveSpec& curve, const SampledFunction& f, const ProfileParams& p, int sign,
                                 double bandwidth, bool cut) {
    SampledFunction g = evolve_at(curve, f, -p.t0);
    g = translate(g, -p.x0);
    g = modulate(g, -sign * p.xi);
    g = spectral_window(g, bandwidth / p.h);
    g = rescale(g, 1.0 / p.h);
    if (cut) g = spatial_cut(g);
    return hard_lowpass(g, bandwidth);
}

struct Candidate {
    bool present = false;
    int sign = 1;
    double value = 0.0;
    ProfileParams params;
    SampledFunction phi;
};

Candidate find_candidate(const CurveSpec& curve, const SampledFunction& f, int sign, const ExtractionConfig& cfg,
                         const SpaceTimeGrid& sg, double total_mass) {
    Candidate c;
    c.sign = sign;
    SampledFunction half = project_halfline(f, sign);
    double m = l2_norm(half);
    if (m * m <= 1e-24 * total_mass) return c;
    RefinedReport rep = refined_functional(curve, half, cfg.scales, sg);
    if (rep.functional_value <= 0) return c;
    const Grid1D& g = f.grid();
    const DyadicInterval cell = rep.best_cell;
    c.params.h = std::ldexp(1.0, -cell.j);
    const bool at_zero = (sign > 0 && cell.k == 0) || (sign < 0 && cell.k == -1);
    if (!at_zero) {
        double num = 0.0, den = 0.0;
        for (int k = 0; k < g.n; ++k) {
            double xi = g.xi(k);
            if (std::floor(std::ldexp(xi, -cell.j)) != double(cell.k)) continue;
            double w = std::norm(half.freq()[k]);
            num += xi * w;
            den += w;
        }
        // snap so that every modulation in the chain is periodic on the grid
        double q = g.dxi() * std::max(1.0, 1.0 / c.params.h);
        c.params.xi = std::round(std::abs(num / den) / q) * q;
    }
    // focus point of the selected cell
    SampledFunction part = restrict_to_cell(half, cell);
    double best = -1.0;
    for_each_slice(Multiplier::of(curve, g, true), part, sg, [&](int i, cvec& row) {
        for (int j = 0; j < g.n; ++j) {
            double a = std::abs(row[j]);
            if (a > best) {
                best = a;
                c.params.t0 = -sg.times[i];
                c.params.x0 = g.x(j);
            }
        }
    });
    c.phi = to_profile_frame(curve, half, c.params, sign, cfg.bandwidth, true);
    c.value = rep.functional_value;
    c.present = l2_norm(c.phi) > 0;
    return c;
}

} // namespace

bool diverges(const std::vector<double>& v, double theta) {
    if (v.empty()) return false;
    const double last = v.back();
    if (!std::isfinite(last)) return true;
    const std::size_t ref = (2 * v.size()) / 3;
    return last > theta && last > v[std::min(ref, v.size() - 1)];
}

OrthoMode ortho_mode(const CurveSpec& curve) {
    switch (curve.kind) {
    case CurveKind::HomOdd: return OrthoMode::OddHom;
    case CurveKind::Inhom35: return OrthoMode::OddInhom35;
    case CurveKind::InhomEven35: return OrthoMode::EvenInhom35;
    default: return OrthoMode::EvenHom;
    }
}

double ortho_alpha(const CurveSpec& curve) {
    switch (curve.kind) {
    case CurveKind::HomOdd:
    case CurveKind::HomEven: return curve.ell;
    case CurveKind::Schrod: return 2.0;
    default: return 5.0;
    }
}

OrthogonalityVerdict classify_orthogonality(const ParamSequence& a, const ParamSequence& b, double theta) {
    if (a.mode != b.mode) throw ValidationError("parameter sequences use different modes");
    if (a.entries.size() != b.entries.size()) throw ValidationError("parameter sequences differ in length");
    if (a.entries.size() < 8) throw ValidationError("parameter sequences need at least 8 entries");
    const OrthoMode mode = a.mode;
    const double alpha = a.alpha;
    const std::size_t N = a.entries.size();
    bool equal = true, zero = true;
    for (std::size_t n = 0; n < N; ++n) {
        const auto &p = a.entries[n], &q = b.entries[n];
        if (!(p.h > 0) || !(q.h > 0)) throw ValidationError("scales must be positive");
        if (!same(p.h, q.h) || !same(p.xi, q.xi)) equal = false;
        if (p.xi != 0.0 || q.xi != 0.0) zero = false;
    }
    OrthogonalityVerdict v;
    auto series = [&](const std::string& name, auto fn) {
        ConditionSeries s{name, {}, false};
        for (std::size_t n = 0; n < N; ++n) s.values.push_back(fn(a.entries[n], b.entries[n]));
        s.diverges = diverges(s.values, theta);
        v.diagnostics.push_back(s);
        return s.diverges;
    };
    if (!equal) {
        bool minus = series("scale+difference", [](const ProfileParams& p, const ProfileParams& q) {
            return p.h / q.h + q.h / p.h + (p.h + q.h) * std::abs(p.xi - q.xi);
        });
        bool plus = !odd(mode) || series("scale+sum", [](const ProfileParams& p, const ProfileParams& q) {
            return p.h / q.h + q.h / p.h + (p.h + q.h) * std::abs(p.xi + q.xi);
        });
        if (minus && plus) v.orthogonal = true, v.matched_case = 1;
        return v;
    }
    if (zero) {
        bool d = series("still", [&](const ProfileParams& p, const ProfileParams& q) {
            return still_display(mode, alpha, p.h, p.x0 - q.x0, p.t0 - q.t0);
        });
        if (d) v.orthogonal = true, v.matched_case = odd(mode) ? 4 : 3;
        return v;
    }
    auto moving = [&] {
        return series("moving", [&](const ProfileParams& p, const ProfileParams& q) {
            return moving_display(mode, alpha, p.h, p.xi, p.x0 - q.x0, p.t0 - q.t0);
        });
    };
    if (odd(mode)) {
        if (series("carrier+", [](const ProfileParams& p, const ProfileParams&) { return p.h * p.xi; })) {
            if (moving()) v.orthogonal = true, v.matched_case = 2;
        } else if (series("carrier-", [](const ProfileParams& p, const ProfileParams&) { return -p.h * p.xi; })) {
            if (moving()) v.orthogonal = true, v.matched_case = 3;
        }
    } else if (series("carrier", [](const ProfileParams& p, const ProfileParams&) { return std::abs(p.h * p.xi); })) {
        if (moving()) v.orthogonal = true, v.matched_case = 2;
    }
    return v;
}

std::pair<ParamSequence, ParamSequence> embed_parameters(const ProfileParams& a, const ProfileParams& b,
                                                         OrthoMode mode, double alpha, int length) {
    if (length < 8) throw ValidationError("embedding needs at least 8 entries");
    if (!(a.h > 0) || !(b.h > 0)) throw ValidationError("scales must be positive");
    const double hmin = std::min(a.h, b.h);
    const bool snapped = std::abs(std::log2(b.h / a.h)) < 0.5 && hmin * std::abs(b.xi - a.xi) < 0.25;
    ParamSequence A{{}, mode, alpha}, B{{}, mode, alpha};
    // keep h finite: the log of the scale ratio grows linearly up to 600
    const double lr = std::log(b.h / a.h);
    const double rate = lr == 0.0 ? 0.0 : lr * std::min(1.0, 600.0 / (length * std::abs(lr)));
    for (int n = 1; n <= length; ++n) {
        ProfileParams p = a, q = b;
        q.x0 = a.x0 + n * (b.x0 - a.x0);
        q.t0 = a.t0 + n * (b.t0 - a.t0);
        if (snapped) {
            q.h = a.h;
            // carrier inside the profile's own bandwidth counts as zero; otherwise it grows
            double xi = std::abs(a.h * a.xi) < 1.0 ? 0.0 : a.xi * n;
            p.xi = q.xi = xi;
        } else {
            q.h = a.h * std::exp(rate * n);
            q.xi = a.xi + n * (b.xi - a.xi);
        }
        A.entries.push_back(p);
        B.entries.push_back(q);
    }
    return {A, B};
}

SampledFunction synthesize(const CurveSpec& curve, const TwoProfilePair& pair) {
    return apply_profile_op(pair.params, 1, pair.phi_plus, curve) +
           apply_profile_op(pair.params, -1, pair.phi_minus, curve);
}

TwoProfilePair realify(const TwoProfilePair& pair) {
    SampledFunction phi = (pair.phi_plus + pair.phi_minus.conj()).scaled(0.5);
    return {pair.params, phi, phi.conj()};
}

ExtractionResult extract_one_pair(const CurveSpec& curve, const SampledFunction& f, const ExtractionConfig& cfg) {
    if (!curve.odd_phase()) throw ValidationError("extraction is defined for odd curves");
    const double total = std::pow(l2_norm(f), 2);
    if (total == 0.0) throw ValidationError("cannot extract from the zero function");
    const Grid1D& g = f.grid();
    const SpaceTimeGrid sg = SpaceTimeGrid::uniform(cfg.T, cfg.n_times, g);
    Candidate plus = find_candidate(curve, f, 1, cfg, sg, total);
    Candidate minus = find_candidate(curve, f, -1, cfg, sg, total);
    if (!plus.present && !minus.present) throw NumericError("no extractable profile");

    ExtractionResult out;
    TwoProfilePair& pair = out.pair;
    SampledFunction zero = SampledFunction::zero(g);
    if (plus.present && minus.present) {
        const Candidate& dom = minus.value > plus.value ? minus : plus;
        const Candidate& other = minus.value > plus.value ? plus : minus;
        out.dominant_sign = dom.sign;
        auto [A, B] = embed_parameters(plus.params, minus.params, ortho_mode(curve), ortho_alpha(curve));
        out.grouped = !classify_orthogonality(A, B, cfg.theta).orthogonal;
        if (out.grouped) {
            pair.params = dom.params;
            SampledFunction own = apply_profile_op(other.params, other.sign, other.phi, curve);
            SampledFunction moved = to_profile_frame(curve, own, pair.params, other.sign, 2 * cfg.bandwidth, false);
            (dom.sign > 0 ? pair.phi_plus : pair.phi_minus) = dom.phi;
            (dom.sign > 0 ? pair.phi_minus : pair.phi_plus) = moved;
        } else {
            const Candidate& big = std::pow(l2_norm(minus.phi), 2) > std::pow(l2_norm(plus.phi), 2) ? minus : plus;
            out.dominant_sign = big.sign;
            pair.params = big.params;
            (big.sign > 0 ? pair.phi_plus : pair.phi_minus) = big.phi;
            (big.sign > 0 ? pair.phi_minus : pair.phi_plus) = zero;
        }
    } else {
        const Candidate& c = plus.present ? plus : minus;
        out.dominant_sign = c.sign;
        pair.params = c.params;
        (c.sign > 0 ? pair.phi_plus : pair.phi_minus) = c.phi;
        (c.sign > 0 ? pair.phi_minus : pair.phi_plus) = zero;
    }

    // least-squares amplitudes of the two components against f
    SampledFunction Sp = apply_profile_op(pair.params, 1, pair.phi_plus, curve);
    SampledFunction Sm = apply_profile_op(pair.params, -1, pair.phi_minus, curve);
    const double npp = std::norm(inner(Sp, Sp)) > 0 ? inner(Sp, Sp).real() : 0.0;
    const double nmm = std::norm(inner(Sm, Sm)) > 0 ? inner(Sm, Sm).real() : 0.0;
    cplx a = 0.0, b = 0.0;
    const cplx fp = inner(f, Sp), fm = inner(f, Sm), pm = inner(Sm, Sp);
    const double det = npp * nmm - std::norm(pm);
    if (npp > 0 && nmm > 0 && det > 1e-10 * npp * nmm) {
        // [npp pm; conj(pm) nmm] [a; b] = [fp; fm]
        a = (fp * nmm - pm * fm) / det;
        b = (npp * fm - std::conj(pm) * fp) / det;
    } else if (npp >= nmm && npp > 0) {
        a = fp / npp;
    } else if (nmm > 0) {
        b = fm / nmm;
    }
    pair.phi_plus = pair.phi_plus.scaled(a);
    pair.phi_minus = pair.phi_minus.scaled(b);
    // drop the roundoff floor so that a nearly exhausted remainder still passes band checks
    SampledFunction r = f - synthesize(curve, pair);
    double peak = 0.0;
    for (const auto& v : f.freq()) peak = std::max(peak, std::abs(v));
    cvec hat(r.freq());
    for (auto& v : hat)
        if (std::abs(v) < 1e-14 * peak) v = 0.0;
    out.remainder = SampledFunction::from_freq(g, std::move(hat));
    return out;
}

Decoupling decoupling_report(const CurveSpec& curve, const std::vector<TwoProfilePair>& pairs, const SampledFunction& f,
                             const SampledFunction& remainder, const SpaceTimeGrid& sg) {
    if (f.grid() != remainder.grid() || f.grid() != sg.spatial) throw DimensionError("grids differ");
    Decoupling d;
    const std::size_t J = pairs.size();
    Accumulator budget;
    budget.add(std::pow(l2_norm(f), 2));
    for (const auto& p : pairs) {
        budget.add(-std::pow(l2_norm(p.phi_plus), 2));
        budget.add(-std::pow(l2_norm(p.phi_minus), 2));
    }
    budget.add(-std::pow(l2_norm(remainder), 2));
    d.l2_budget_residual = std::abs(budget.value());
    d.remainder_strichartz = extend_lp_norm(curve, remainder, sg, 6);
    d.pairwise_bilinear.assign(J, std::vector<double>(J, 0.0));
    if (J == 0) return d;

    std::vector<SampledFunction> S;
    for (const auto& p : pairs) S.push_back(synthesize(curve, p));
    std::vector<const cvec*> hats;
    for (const auto& s : S) hats.push_back(&s.freq());
    std::vector<Accumulator> cross(J * J), single(J);
    Accumulator joint;
    const int n = sg.spatial.n;
    cvec sum(n);
    for_each_slice_multi(Multiplier::of(curve, f.grid(), true), hats, sg, [&](int i, std::vector<cvec>& rows) {
        const double w = sg.weights[i];
        std::fill(sum.begin(), sum.end(), cplx(0.0));
        for (std::size_t a = 0; a < J; ++a) {
            Accumulator r6;
            for (int x = 0; x < n; ++x) {
                sum[x] += rows[a][x];
                r6.add(pow_abs(std::abs(rows[a][x]), 6));
            }
            single[a].add(r6.value() * w);
            for (std::size_t b = a + 1; b < J; ++b) {
                Accumulator r;
                for (int x = 0; x < n; ++x) r.add(pow_abs(std::abs(rows[a][x] * rows[b][x]), 3));
                cross[a * J + b].add(r.value() * w);
            }
        }
        Accumulator r;
        for (int x = 0; x < n; ++x) r.add(pow_abs(std::abs(sum[x]), 6));
        joint.add(r.value() * w);
    });
    const double dx = sg.spatial.dx();
    Accumulator total6;
    for (std::size_t a = 0; a < J; ++a) {
        double s6 = single[a].value() * dx;
        total6.add(s6);
        // Hoelder equality on the diagonal
        d.pairwise_bilinear[a][a] = std::pow(s6, 1.0 / 3);
        for (std::size_t b = a + 1; b < J; ++b)
            d.pairwise_bilinear[a][b] = d.pairwise_bilinear[b][a] = std::cbrt(cross[a * J + b].value() * dx);
    }
    d.sixth_power_sum = total6.value();
    d.sixth_power_gap = std::abs(joint.value() * dx - d.sixth_power_sum);
    return d;
}

DecompositionReport decompose(const CurveSpec& curve, const SampledFunction& f, int J_max, double eps,
                              const DecompositionConfig& cfg) {
    if (J_max < 1) throw ValidationError("J_max must be at least 1");
    if (!(eps > 0 && eps <= 1)) throw ValidationError("eps must lie in (0, 1]");
    if (!curve.odd_phase()) throw ValidationError("decomposition is defined for odd curves");
    const SpaceTimeGrid sg = SpaceTimeGrid::uniform(cfg.T, cfg.n_times, f.grid());
    DecompositionReport rep;
    rep.initial_strichartz = extend_lp_norm(curve, f, sg, 6);
    SampledFunction r = f;
    while (int(rep.pairs.size()) < J_max) {
        if (extend_lp_norm(curve, r, sg, 6) <= eps * rep.initial_strichartz) break;
        ExtractionResult ex = extract_one_pair(curve, r, cfg.extraction);
        if (l2_norm(ex.pair.phi_plus) + l2_norm(ex.pair.phi_minus) == 0.0) break;
        rep.pairs.push_back(ex.pair);
        rep.grouped.push_back(ex.grouped);
        r = ex.remainder;
        rep.remainder_l2.push_back(l2_norm(r));
    }
    rep.remainder = r;
    Decoupling d = decoupling_report(curve, rep.pairs, f, r, sg);
    rep.remainder_strichartz = d.remainder_strichartz;
    rep.l2_budget_residual = d.l2_budget_residual;
    rep.pairwise_bilinear = d.pairwise_bilinear;
    rep.sixth_power_gap = d.sixth_power_gap;
    rep.sixth_power_sum = d.sixth_power_sum;
    const std::size_t J = rep.pairs.size();
    rep.pair_orthogonal.assign(J, std::vector<int>(J, -1));
    for (std::size_t a = 0; a < J; ++a)
        for (std::size_t b = a + 1; b < J; ++b) {
            auto [A, B] = embed_parameters(rep.pairs[a].params, rep.pairs[b].params, ortho_mode(curve),
                                           ortho_alpha(curve));
            auto v = classify_orthogonality(A, B, cfg.extraction.theta);
            rep.pair_orthogonal[a][b] = rep.pair_orthogonal[b][a] = v.orthogonal ? v.matched_case : 0;
        }
    return rep;
}

} // namespace strz
