#include "strichartz/refined.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fft.hpp"

namespace strz {

namespace {

constexpr double kTwoPi = 6.283185307179586;

bool in_cell(double xi, const DyadicInterval& c) { return std::floor(std::ldexp(xi, -c.j)) == double(c.k); }

void check_pair(const DyadicInterval& tau, const DyadicInterval& taup) {
    if (tau.j != taup.j) throw ValidationError("cells must share a scale");
    const bool pos = tau.lo() >= 0 && taup.lo() >= 0;
    const bool neg = tau.hi() <= 0 && taup.hi() <= 0;
    if (!pos && !neg) throw ValidationError("cells must lie in one half-line");
    if (tau == taup || adjacent(tau, taup)) throw ValidationError("cells must be separated");
}

int next_pow2(double x) {
    int n = 1;
    while (n < x) n <<= 1;
    return n;
}

} // namespace

SampledFunction restrict_to_cell(const SampledFunction& f, const DyadicInterval& cell) {
    cvec hat(f.freq());
    for (int k = 0; k < f.size(); ++k)
        if (!in_cell(f.grid().xi(k), cell)) hat[k] = 0.0;
    return SampledFunction::from_freq(f.grid(), std::move(hat));
}

CellRestriction make_cell_restriction(const SampledFunction& f, const DyadicInterval& cell) {
    return {f, cell, restrict_to_cell(f, cell)};
}

double cell_mass(const SampledFunction& f, const DyadicInterval& cell) {
    Accumulator acc;
    for (int k = 0; k < f.size(); ++k)
        if (in_cell(f.grid().xi(k), cell)) acc.add(std::norm(f.freq()[k]));
    return acc.value() * f.grid().dxi() / kTwoPi;
}

std::vector<DyadicInterval> cells_meeting_spectrum(const SampledFunction& f, const ScaleRange& scales, double rel) {
    if (scales.j_min > scales.j_max) throw ValidationError("empty scale range");
    double total = 0.0;
    for (const auto& v : f.freq()) total += std::norm(v);
    std::vector<DyadicInterval> out;
    if (total == 0.0) return out;
    for (int j = scales.j_min; j <= scales.j_max; ++j) {
        std::map<std::int64_t, double> mass;
        for (int k = 0; k < f.size(); ++k) {
            double w = std::norm(f.freq()[k]);
            if (w > 0.0) mass[std::int64_t(std::floor(std::ldexp(f.grid().xi(k), -j)))] += w;
        }
        for (const auto& [k, w] : mass)
            if (w > rel * total) out.push_back({j, k});
    }
    return out;
}

double bilinear_normalizer(const CurveSpec& curve, const DyadicInterval& tau, double q) {
    if (q < 2) throw ValidationError("bilinear exponent must be at least 2");
    const double c = std::abs(tau.center());
    const double e = (q - 3) / q;
    switch (curve.kind) {
    case CurveKind::Inhom35: return std::pow(c + c * c * c, e / 3) * std::pow(tau.length(), e);
    case CurveKind::HomOdd: return std::pow(c, (curve.ell - 2) * e / 3) * std::pow(tau.length(), e);
    default: throw ValidationError("bilinear normalizer is defined for odd curves only");
    }
}

SpaceTimeGrid transit_grid(const CurveSpec& curve, const Grid1D& g, const DyadicInterval& tau,
                           const DyadicInterval& taup, int max_times) {
    check_pair(tau, taup);
    const double dv = std::abs(curve.phase_d1(tau.center()) - curve.phase_d1(taup.center()));
    if (!(dv > 0)) throw ValidationError("cells move with equal group velocity");
    const int nt = std::clamp(next_pow2(8 * g.L * (tau.length() + taup.length()) / M_PI), 64, max_times);
    return SpaceTimeGrid::uniform(g.L / dv, nt, g);
}

double bilinear_numerator(const CurveSpec& curve, const SampledFunction& u, const SampledFunction& v,
                          const DyadicInterval& tau, const DyadicInterval& taup, double q,
                          const SpaceTimeGrid& sg) {
    if (q < 2) throw ValidationError("bilinear exponent must be at least 2");
    check_pair(tau, taup);
    if (u.grid() != v.grid() || u.grid() != sg.spatial) throw DimensionError("grids differ");
    SampledFunction ut = restrict_to_cell(u, tau), vt = restrict_to_cell(v, taup);
    check_band(ut, "bilinear");
    check_band(vt, "bilinear");
    Multiplier m = Multiplier::of(curve, u.grid(), true);
    Accumulator total;
    for_each_slice_multi(m, {&ut.freq(), &vt.freq()}, sg, [&](int i, std::vector<cvec>& rows) {
        Accumulator r;
        for (int x = 0; x < sg.spatial.n; ++x) r.add(pow_abs(std::abs(rows[0][x] * rows[1][x]), q));
        total.add(r.value() * sg.weights[i]);
    });
    return std::pow(total.value() * sg.spatial.dx(), 1.0 / q);
}

double bilinear_ratio(const CurveSpec& curve, const SampledFunction& u, const SampledFunction& v,
                      const DyadicInterval& tau, const DyadicInterval& taup, double q, const SpaceTimeGrid& sg) {
    const double nu = l2_norm(u), nv = l2_norm(v);
    const double norm = bilinear_normalizer(curve, tau, q);
    check_pair(tau, taup);
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return bilinear_numerator(curve, u, v, tau, taup, q, sg) / (norm * nu * nv);
}

double bilinear_ratio(const CurveSpec& curve, const SampledFunction& u, const SampledFunction& v,
                      const DyadicInterval& tau, const DyadicInterval& taup, double q) {
    return bilinear_ratio(curve, u, v, tau, taup, q, transit_grid(curve, u.grid(), tau, taup));
}

QuasiOrthogonality quasi_orthogonality_gap(const CurveSpec& curve, const SampledFunction& f, int depth,
                                           const ScaleRange& scales, const SpaceTimeGrid& sg) {
    if (depth < 1) throw ValidationError("depth must be positive");
    if (f.grid() != sg.spatial) throw DimensionError("grids differ");
    double peak = 0.0;
    for (const auto& v : f.freq()) peak = std::max(peak, std::abs(v));
    bool pos = false, neg = false;
    for (int k = 0; k < f.size(); ++k) {
        if (std::abs(f.freq()[k]) <= 1e-12 * peak) continue;
        (f.grid().xi(k) >= 0 ? pos : neg) = true;
    }
    if (pos && neg) throw ValidationError("spectrum must lie in one half-line");
    QuasiOrthogonality out;
    auto cells = cells_meeting_spectrum(f, scales);
    std::map<std::pair<int, std::int64_t>, int> index;
    for (std::size_t i = 0; i < cells.size(); ++i) index[{cells[i].j, cells[i].k}] = int(i);
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (const auto& tp : whitney_partners(cells[i], depth, 1)) {
            auto it = index.find({tp.j, tp.k});
            if (it != index.end()) pairs.push_back({int(i), it->second});
        }
    out.pairs = int(pairs.size());
    if (pairs.empty()) return out;
    check_band(f, "quasi-orthogonality");

    std::vector<int> used;
    for (auto [a, b] : pairs) used.push_back(a), used.push_back(b);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<SampledFunction> parts;
    std::map<int, int> slot;
    for (int c : used) {
        slot[c] = int(parts.size());
        parts.push_back(restrict_to_cell(f, cells[c]));
    }
    std::vector<const cvec*> hats;
    for (const auto& p : parts) hats.push_back(&p.freq());

    Multiplier m = Multiplier::of(curve, f.grid(), true);
    const int n = sg.spatial.n;
    Accumulator lhs;
    std::vector<Accumulator> each(pairs.size());
    cvec sum(n);
    for_each_slice_multi(m, hats, sg, [&](int i, std::vector<cvec>& rows) {
        std::fill(sum.begin(), sum.end(), cplx(0.0));
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const cvec& a = rows[slot[pairs[p].first]];
            const cvec& b = rows[slot[pairs[p].second]];
            Accumulator r;
            for (int x = 0; x < n; ++x) {
                cplx v = a[x] * b[x];
                sum[x] += v;
                r.add(pow_abs(std::abs(v), 3));
            }
            each[p].add(r.value() * sg.weights[i]);
        }
        Accumulator r;
        for (int x = 0; x < n; ++x) r.add(pow_abs(std::abs(sum[x]), 3));
        lhs.add(r.value() * sg.weights[i]);
    });
    const double dx = sg.spatial.dx();
    out.lhs = std::sqrt(lhs.value() * dx);
    Accumulator rhs;
    for (auto& e : each) rhs.add(std::sqrt(e.value() * dx));
    out.rhs = rhs.value();
    return out;
}

RefinedReport refined_functional(const CurveSpec& curve, const SampledFunction& f, const ScaleRange& scales,
                                 const SpaceTimeGrid& sg, double theta) {
    if (!(theta > 0 && theta < 1)) throw ValidationError("theta must lie in (0, 1)");
    if (f.grid() != sg.spatial) throw DimensionError("grids differ");
    RefinedReport rep;
    rep.theta = theta;
    rep.l2 = l2_norm(f);
    auto cells = cells_meeting_spectrum(f, scales);
    if (cells.empty()) return rep;
    check_band(f, "refined functional");

    std::vector<SampledFunction> parts;
    for (const auto& c : cells) parts.push_back(restrict_to_cell(f, c));
    std::vector<const cvec*> hats;
    for (const auto& p : parts) hats.push_back(&p.freq());
    // the full extension rides along as the last row
    hats.push_back(&f.freq());
    std::vector<double> sup(cells.size(), 0.0);
    Accumulator l6;
    Multiplier m = Multiplier::of(curve, f.grid(), true);
    for_each_slice_multi(m, hats, sg, [&](int i, std::vector<cvec>& rows) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            for (const auto& v : rows[c]) sup[c] = std::max(sup[c], std::abs(v));
        Accumulator r;
        for (const auto& v : rows.back()) r.add(pow_abs(std::abs(v), 6));
        l6.add(r.value() * sg.weights[i]);
    });
    rep.extension_l6 = std::pow(l6.value() * sg.spatial.dx(), 1.0 / 6);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double v = sup[c] / (curve.weight(cells[c].center()) * std::sqrt(cells[c].length()));
        if (v > rep.functional_value) {
            rep.functional_value = v;
            rep.best_cell = cells[c];
        }
    }
    if (rep.functional_value > 0)
        rep.constant_estimate =
            rep.extension_l6 / (std::pow(rep.functional_value, theta) * std::pow(rep.l2, 1 - theta));
    return rep;
}

SampledFunction random_band_input(const Grid1D& g, double lo, double hi, std::uint64_t seed) {
    if (!(hi > lo)) throw ValidationError("empty band");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    cvec hat(g.n, 0.0);
    for (int k = 0; k < g.n; ++k) {
        double xi = g.xi(k);
        if (xi >= lo && xi <= hi) hat[k] = cplx(nd(rng), nd(rng));
    }
    SampledFunction f = SampledFunction::from_freq(g, std::move(hat));
    double n = l2_norm(f);
    if (n == 0.0) throw ValidationError("band contains no grid frequency");
    return f.scaled(1.0 / n);
}

SampledFunction packet_input(const Grid1D& g, double a, double v, double x0) {
    if (!(a > 0)) throw ValidationError("packet width must be positive");
    cvec s(g.n);
    for (int j = 0; j < g.n; ++j) {
        double y = g.x(j) - x0;
        s[j] = std::exp(-y * y / (2 * a * a)) * cplx(std::cos(v * g.x(j)), std::sin(v * g.x(j)));
    }
    SampledFunction f = SampledFunction::from_space(g, std::move(s));
    return f.scaled(1.0 / l2_norm(f));
}

SampledFunction random_cell_input(const Grid1D& g, const DyadicInterval& cell, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    cvec hat(g.n, 0.0);
    for (int k = 0; k < g.n; ++k) {
        double xi = g.xi(k);
        if (!in_cell(xi, cell)) continue;
        double taper = std::sin(M_PI * (xi - cell.lo()) / cell.length());
        hat[k] = taper * cplx(nd(rng), nd(rng));
    }
    SampledFunction f = SampledFunction::from_freq(g, std::move(hat));
    double n = l2_norm(f);
    if (n == 0.0) throw ValidationError("cell contains no grid frequency");
    return f.scaled(1.0 / n);
}

DetectorStudy run_detector_study(const DetectorConfig& cfg) {
    if (cfg.n_random < 1 || cfg.n_concentrated < 1) throw ValidationError("corpus sizes must be positive");
    const Grid1D g = Grid1D::make(cfg.L, cfg.n);
    const SpaceTimeGrid sg = SpaceTimeGrid::uniform(cfg.T, cfg.n_times, g);
    DetectorStudy out;
    for (int i = 0; i < cfg.n_random; ++i) {
        auto f = random_band_input(g, -cfg.band, cfg.band, cfg.seed * 1000003ULL + i);
        out.random.push_back(refined_functional(cfg.curve, f, cfg.scales, sg, cfg.theta));
    }
    for (int i = 0; i < cfg.n_concentrated; ++i) {
        double v = -cfg.band + (i + 0.5) * 2 * cfg.band / cfg.n_concentrated;
        double x0 = -cfg.L / 4 + i * (cfg.L / 2) / cfg.n_concentrated;
        auto f = packet_input(g, cfg.packet_width, v, x0);
        out.concentrated.push_back(refined_functional(cfg.curve, f, cfg.scales, sg, cfg.theta));
    }
    std::vector<double> vals;
    for (const auto& r : out.random) vals.push_back(r.functional_value);
    std::sort(vals.begin(), vals.end());
    const std::size_t h = vals.size() / 2;
    out.median_random = vals.size() % 2 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
    out.min_concentrated_over_median = INFINITY;
    for (const auto& r : out.concentrated)
        out.min_concentrated_over_median =
            std::min(out.min_concentrated_over_median, r.functional_value / out.median_random);
    for (const auto* set : {&out.random, &out.concentrated})
        for (const auto& r : *set) out.fitted_constant = std::max(out.fitted_constant, r.constant_estimate);
    out.covered = true;
    for (const auto* set : {&out.random, &out.concentrated})
        for (const auto& r : *set)
            if (r.extension_l6 > out.fitted_constant * std::pow(r.functional_value, cfg.theta) *
                                     std::pow(r.l2, 1 - cfg.theta) * (1 + 1e-12))
                out.covered = false;
    return out;
}

} // namespace strz
