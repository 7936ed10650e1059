#include "strichartz/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace strz {

namespace {

using i128 = __int128;

i128 binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    i128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void check_ell(int ell) {
    if (ell < 3 || ell > 15 || ell % 2 == 0) throw ValidationError("ell must be odd with 3 <= ell <= 15");
}

int curve_ell(const CurveSpec& curve) {
    if (curve.kind == CurveKind::HomOdd) return curve.ell;
    if (curve.kind == CurveKind::Inhom35) return 5;
    throw ValidationError("geometry needs a hom-odd or inhom35 curve");
}

double taylor_bound(int ell) { return std::pow(3.0, ell - 2) * ell * (ell - 1); }

Band hom_band(int ell, int depth, BandRule rule) {
    auto co = p_coefficients(ell);
    const double bmax = static_cast<double>(co.b[co.max_index]);
    const double p = std::ldexp(1.0, depth);
    const double r1 = p / (p + 1), r2 = (p + 2) / (p + 1);
    Band band;
    band.A = std::ldexp(1.0, 2 * depth - ell - 1) * std::pow(r1, ell - 2) / bmax;
    int e = rule == BandRule::Corrected ? 2 * depth - ell + 3 : 2 * depth - ell + 1;
    band.B = bmax * std::ldexp(1.0, e) * std::pow(r2, ell - 2) + taylor_bound(ell);
    return band;
}

// l(l-1)/2^l (3+2 beta)^{l-2} (1+beta)^2
double dilation_taylor(int ell, double beta) {
    return ell * (ell - 1) / std::ldexp(1.0, ell) * std::pow(3 + 2 * beta, ell - 2) * (1 + beta) * (1 + beta);
}

// (x - y)^2 (x + y) P_k(x, y) / 2^{l-1} = x^l + y^l - (x+y)^l / 2^{l-1}
double gap_identity(int ell, double x, double y) {
    const auto& co = p_coefficients(ell);
    const int m = static_cast<int>(co.b.size()) - 1; // 2k - 2
    double P = 0;
    for (int n = 0; n <= m; ++n) P += static_cast<double>(co.b[n]) * std::pow(x, m - n) * std::pow(y, n);
    return (x - y) * (x - y) * (x + y) * P / std::ldexp(1.0, ell - 1);
}

// (eta^l - c^l - l c^{l-1}(eta - c)) / 2^{l-1}
double tangent_remainder(int ell, double c, double eta) {
    const double d = eta - c;
    double s = 0;
    for (int m = 2; m <= ell; ++m) s += static_cast<double>(binom(ell, m)) * std::pow(c, ell - m) * std::pow(d, m);
    return s / std::ldexp(1.0, ell - 1);
}

double tangent_slope(int ell, double c) { return ell * std::pow(c, ell - 1) / std::ldexp(1.0, ell - 1); }
double tangent_const(int ell, double c) { return (1 - ell) * std::pow(c, ell) / std::ldexp(1.0, ell - 1); }

bool within(double v, double lo, double hi, double tol) { return v >= lo - tol && v <= hi + tol; }

} // namespace

double DyadicInterval::length() const { return std::ldexp(1.0, j); }
double DyadicInterval::lo() const { return std::ldexp(static_cast<double>(k), j); }
double DyadicInterval::hi() const { return std::ldexp(static_cast<double>(k + 1), j); }
double DyadicInterval::center() const { return std::ldexp(static_cast<double>(k) + 0.5, j); }

OddCoefficients p_coefficients(int ell) {
    check_ell(ell);
    static std::map<int, OddCoefficients> cache;
    auto it = cache.find(ell);
    if (it != cache.end()) return it->second;
    std::vector<i128> r(ell + 1);
    for (int i = 0; i <= ell; ++i) r[i] = -binom(ell, i);
    r[0] += i128(1) << (ell - 1);
    r[ell] += i128(1) << (ell - 1);
    const i128 d[4] = {1, -1, -1, 1}; // (x - y)^2 (x + y)
    OddCoefficients out;
    out.ell = ell;
    for (int i = 0; i <= ell - 3; ++i) {
        i128 q = r[i];
        out.b.push_back(static_cast<std::int64_t>(q));
        for (int m = 0; m < 4; ++m) r[i + m] -= q * d[m];
    }
    for (const auto& v : r)
        if (v != 0) throw NumericError("polynomial division left a remainder");
    const int k = (ell - 1) / 2;
    out.max_index = 2 * (k / 2);
    cache.emplace(ell, out);
    return out;
}

std::vector<std::int64_t> p_coefficients_recursive(int ell) {
    check_ell(ell);
    const int k = (ell - 1) / 2, n = 2 * k + 1;
    std::vector<i128> b(2 * k - 1);
    b[0] = (i128(1) << (2 * k)) - 1;
    if (b.size() > 1) b[1] = b[0] - binom(n, 1);
    for (int i = 1; 2 * i < static_cast<int>(b.size()); ++i) {
        i128 s = 0;
        for (int m = 1; m <= 2 * i; ++m) s += binom(n, m);
        b[2 * i] = b[2 * i - 2] + b[0] - s;
        if (2 * i + 1 < static_cast<int>(b.size())) {
            i128 t = 0;
            for (int m = 0; m <= i; ++m) t += binom(n, 2 * m + 1);
            b[2 * i + 1] = b[2 * i] - t;
        }
    }
    return std::vector<std::int64_t>(b.begin(), b.end());
}

double adjacency_lhs(int ell, int N) {
    auto co = p_coefficients(ell);
    const double p = std::ldexp(1.0, N);
    return std::ldexp(1.0, 2 * N - ell - 3) * std::pow(p / (p + 1), ell - 2) / static_cast<double>(co.b[co.max_index]);
}

double adjacency_rhs(int ell) { return std::ldexp(1.0, ell) * ell * (ell - 1); }

int min_adjacency_depth(int ell) {
    check_ell(ell);
    for (int N = 1; N < 64; ++N)
        if (adjacency_lhs(ell, N) > adjacency_rhs(ell)) return N;
    throw NumericError("no adjacency depth below 64");
}

bool adjacent(const DyadicInterval& a, const DyadicInterval& b) {
    return a.j == b.j && (a.k - b.k == 1 || b.k - a.k == 1);
}

bool whitney_related(const DyadicInterval& tau, const DyadicInterval& taup, int depth) {
    if (tau.j != taup.j || depth < 1) return false;
    for (int m = 0; m < depth; ++m)
        if (adjacent(tau.parent(m), taup.parent(m))) return false;
    return adjacent(tau.parent(depth), taup.parent(depth));
}

std::vector<DyadicInterval> whitney_partners(const DyadicInterval& tau, int depth, int side) {
    std::vector<DyadicInterval> out;
    const std::int64_t P = (tau.k >> depth) + (side > 0 ? 1 : -1);
    const std::int64_t first = P << depth, last = (P + 1) << depth;
    for (std::int64_t k = first; k < last; ++k) {
        DyadicInterval t{tau.j, k};
        if (whitney_related(tau, t, depth)) out.push_back(t);
    }
    return out;
}

DyadicBoundsReport dyadic_bounds_check(const DyadicInterval& tau, const DyadicInterval& taup, int depth,
                                       int samples) {
    if (!whitney_related(tau, taup, depth)) throw ValidationError("intervals are not Whitney related");
    const bool pos = tau.lo() >= 0 && taup.lo() >= 0;
    const bool neg = tau.hi() <= 0 && taup.hi() <= 0;
    if (!pos && !neg) throw ValidationError("intervals must lie in one half-line");
    if (samples < 2) throw ValidationError("need at least two samples per interval");
    const double tol = 1e-12;
    const double p = std::ldexp(1.0, depth);
    const double c = std::abs(tau.center()), cp = std::abs(taup.center());
    const double csum = std::abs(tau.center() + taup.center());
    const double len = tau.length();
    DyadicBoundsReport r;
    r.point_bound = r.sum_bounds = r.difference_bounds = true;
    r.center_ratio = cp <= (std::ldexp(1.0, depth + 2) - 1) * c * (1 + tol);
    for (int a = 0; a < samples; ++a) {
        double xi = tau.lo() + len * a / (samples - 1);
        if (std::abs(xi) > 2 * c * (1 + tol)) r.point_bound = false;
        for (int b = 0; b < samples; ++b) {
            double xip = taup.lo() + len * b / (samples - 1);
            double s = std::abs(xi + xip), d = std::abs(xi - xip);
            if (s < p / (p + 1) * csum * (1 - tol) || s > (p + 2) / (p + 1) * csum * (1 + tol)) r.sum_bounds = false;
            if (d < std::ldexp(len, depth - 1) * (1 - tol) || d > std::ldexp(len, depth + 1) * (1 + tol))
                r.difference_bounds = false;
        }
    }
    return r;
}

Band band_constants(const CurveSpec& curve, int depth, BandRule rule) {
    if (depth < 1) throw ValidationError("depth must be positive");
    if (curve.kind == CurveKind::HomOdd) return hom_band(curve.ell, depth, rule);
    if (curve.kind == CurveKind::Inhom35) {
        Band b3 = hom_band(3, depth, rule), b5 = hom_band(5, depth, rule);
        return {std::min(b3.A, b5.A), std::max(b3.B, b5.B)};
    }
    throw ValidationError("geometry needs a hom-odd or inhom35 curve");
}

Parallelogram build_parallelogram(double J_lo, double J_hi, const CurveSpec& curve, int depth, double beta,
                                  BandRule rule) {
    if (!(J_lo > 0.0) || !(J_hi > J_lo)) throw ValidationError("interval J must lie strictly inside R_+");
    if (!(beta >= 0.0)) throw ValidationError("dilation beta must be nonnegative");
    Parallelogram P;
    P.c = 0.5 * (J_lo + J_hi);
    P.length = J_hi - J_lo;
    P.beta = beta;
    const double c = P.c, q = P.length * P.length / 4;
    if (curve.kind == CurveKind::HomOdd) {
        const int ell = curve.ell;
        P.K1 = tangent_slope(ell, c);
        P.K0 = tangent_const(ell, c);
        P.D = std::pow(c, ell - 2) * q;
    } else if (curve.kind == CurveKind::Inhom35) {
        P.K1 = tangent_slope(3, c) + tangent_slope(5, c);
        P.K0 = tangent_const(3, c) + tangent_const(5, c);
        P.D = (c + c * c * c) * q;
    } else {
        throw ValidationError("geometry needs a hom-odd or inhom35 curve");
    }
    Band b = band_constants(curve, depth, rule);
    P.A = b.A;
    P.B = b.B;
    return P;
}

double offset_from_tangent(const CurveSpec& curve, double c, double xi, double xip) {
    const double eta = xi + xip;
    if (curve.kind == CurveKind::HomOdd)
        return gap_identity(curve.ell, xi, xip) + tangent_remainder(curve.ell, c, eta);
    if (curve.kind == CurveKind::Inhom35)
        return gap_identity(3, xi, xip) + tangent_remainder(3, c, eta) + gap_identity(5, xi, xip) +
               tangent_remainder(5, c, eta);
    throw ValidationError("geometry needs a hom-odd or inhom35 curve");
}

bool containment_check_band(const DyadicInterval& tau, const DyadicInterval& taup, const CurveSpec& curve,
                            int depth, int samples, Band band) {
    if (!whitney_related(tau, taup, depth)) throw ValidationError("intervals are not Whitney related");
    if (tau.lo() < 0 || taup.lo() < 0) throw ValidationError("containment is checked on R_+");
    if (samples < 2) throw ValidationError("need at least two samples per interval");
    curve_ell(curve);
    const double J_lo = tau.lo() + taup.lo(), J_hi = tau.hi() + taup.hi();
    Parallelogram P = build_parallelogram(J_lo, J_hi, curve, depth, 0.0);
    const double tol = 1e-12;
    for (int a = 0; a < samples; ++a) {
        double xi = tau.lo() + tau.length() * a / (samples - 1);
        for (int b = 0; b < samples; ++b) {
            double xip = taup.lo() + taup.length() * b / (samples - 1);
            double eta = xi + xip;
            if (!within(eta, J_lo, J_hi, tol * J_hi)) return false;
            double G = offset_from_tangent(curve, P.c, xi, xip) / P.D;
            if (!within(G, band.A, band.B, tol * band.B)) return false;
        }
    }
    return true;
}

bool containment_check(const DyadicInterval& tau, const DyadicInterval& taup, const CurveSpec& curve, int depth,
                       int samples, BandRule rule) {
    return containment_check_band(tau, taup, curve, depth, samples, band_constants(curve, depth, rule));
}

double select_beta(const CurveSpec& curve, int depth) {
    Band b = band_constants(curve, depth);
    auto taylor = [&](double beta) {
        if (curve.kind == CurveKind::Inhom35) return std::max(dilation_taylor(3, beta), dilation_taylor(5, beta));
        return dilation_taylor(curve_ell(curve), beta);
    };
    auto ok = [&](double beta) {
        bool lower = b.A / 9 <= b.A - beta * (b.B - b.A) / 2 - taylor(beta);
        bool upper = 4 * b.B + 2 * beta * (b.B - b.A) <= 5 * b.B;
        return lower && upper;
    };
    if (!ok(0.0)) throw ValidationError("no admissible dilation at this depth");
    if (ok(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

// exact 1-D linear program in eta: the two strips overlap iff some eta in the
// common eta-range has upper_a >= lower_b and upper_b >= lower_a
bool parallelograms_intersect(const Parallelogram& a, const Parallelogram& b, double slack) {
    const double eta_scale = std::max(std::abs(a.eta_hi()), std::abs(b.eta_hi()));
    double lo = std::max(a.eta_lo(), b.eta_lo()) - slack * eta_scale;
    double hi = std::min(a.eta_hi(), b.eta_hi()) + slack * eta_scale;
    if (lo > hi) return false;
    auto line = [](const Parallelogram& p, double g, double& slope, double& icept) {
        slope = p.K1;
        icept = p.K0 + g * p.D;
    };
    double sa_hi, ia_hi, sa_lo, ia_lo, sb_hi, ib_hi, sb_lo, ib_lo;
    line(a, a.g_hi(), sa_hi, ia_hi);
    line(a, a.g_lo(), sa_lo, ia_lo);
    line(b, b.g_hi(), sb_hi, ib_hi);
    line(b, b.g_lo(), sb_lo, ib_lo);
    const double omega_scale = std::max({std::abs(sa_hi * hi + ia_hi), std::abs(sb_hi * hi + ib_hi),
                                         std::abs(sa_lo * lo + ia_lo), std::abs(sb_lo * lo + ib_lo)});
    const double tol = slack * omega_scale;
    // alpha eta + gamma >= -tol
    auto clip = [&](double alpha, double gamma) {
        if (alpha > 0)
            lo = std::max(lo, (-tol - gamma) / alpha);
        else if (alpha < 0)
            hi = std::min(hi, (-tol - gamma) / alpha);
        else if (gamma < -tol)
            hi = lo - 1; // infeasible
    };
    clip(sa_hi - sb_lo, ia_hi - ib_lo);
    clip(sb_hi - sa_lo, ib_hi - ia_lo);
    return lo <= hi;
}

CoverReport cover_multiplicity(const CurveSpec& curve, int depth, double beta, const CoverWindow& w) {
    curve_ell(curve);
    if (w.j_max < w.j_min || !(w.freq_hi > w.freq_lo) || !(w.freq_lo > 0.0))
        throw ValidationError("empty or non-positive enumeration window");
    // pairs with equal tau + tau' share one parallelogram; group them by (j, k + k')
    struct Group {
        long long count = 0;
        DyadicInterval tau, taup;
    };
    std::map<std::pair<int, std::int64_t>, Group> groups;
    CoverReport rep;
    for (int j = w.j_min; j <= w.j_max; ++j) {
        const double len = std::ldexp(1.0, j);
        const std::int64_t kmin = static_cast<std::int64_t>(std::ceil(w.freq_lo / len));
        const std::int64_t kmax = static_cast<std::int64_t>(std::floor(w.freq_hi / len)) - 1;
        for (std::int64_t k = kmin; k <= kmax; ++k) {
            DyadicInterval tau{j, k};
            if (((k >> depth) + 1) << depth > kmax) break;
            for (const auto& tp : whitney_partners(tau, depth, 1)) {
                if (tp.k > kmax) break;
                auto& g = groups[{j, k + tp.k}];
                if (g.count == 0) {
                    g.tau = tau;
                    g.taup = tp;
                }
                ++g.count;
                ++rep.pairs;
            }
        }
    }
    if (groups.empty()) throw ValidationError("no Whitney pairs in the enumeration window");

    struct Entry {
        std::int64_t s;
        long long count;
        Parallelogram P;
        DyadicInterval tau, taup;
    };
    std::map<int, std::vector<Entry>> by_scale;
    for (const auto& [key, g] : groups) {
        const double len = std::ldexp(1.0, key.first);
        by_scale[key.first].push_back(
            {key.second, g.count,
             build_parallelogram(std::ldexp(static_cast<double>(key.second), key.first),
                                 std::ldexp(static_cast<double>(key.second), key.first) + 2 * len, curve, depth, beta),
             g.tau, g.taup});
    }
    for (const auto& [j, entries] : by_scale) {
        for (const auto& e : entries) {
            long long m = 0;
            for (const auto& [j2, others] : by_scale) {
                // eta ranges can only overlap for sums within this window
                const double c = e.P.c, r = (1 + beta) * e.P.length / 2;
                const double len2 = std::ldexp(1.0, j2);
                const double r2 = (1 + beta) * len2;
                const double s_lo = (c - r - r2) / len2 - 1 - 1, s_hi = (c + r + r2) / len2 - 1 + 1;
                auto first = std::lower_bound(others.begin(), others.end(), s_lo,
                                              [](const Entry& x, double v) { return static_cast<double>(x.s) < v; });
                for (auto it = first; it != others.end() && static_cast<double>(it->s) <= s_hi; ++it)
                    if (parallelograms_intersect(e.P, it->P)) m += it->count;
            }
            if (m > rep.multiplicity) {
                rep.multiplicity = m;
                rep.argmax_tau = e.tau;
                rep.argmax_taup = e.taup;
            }
        }
    }
    return rep;
}

std::vector<std::pair<DyadicInterval, DyadicInterval>> sample_whitney_pairs(int depth, int count, std::uint64_t seed,
                                                                            int j_lo, int j_hi) {
    if (count < 0 || j_lo > j_hi) throw ValidationError("bad sampling window");
    std::mt19937_64 rng(seed);
    std::vector<std::pair<DyadicInterval, DyadicInterval>> out;
    while (static_cast<int>(out.size()) < count) {
        int j = std::uniform_int_distribution<int>(j_lo, j_hi)(rng);
        std::int64_t k = std::uniform_int_distribution<std::int64_t>(1, 1 << 14)(rng);
        DyadicInterval tau{j, k};
        auto parts = whitney_partners(tau, depth, out.size() % 2 ? 1 : -1);
        std::erase_if(parts, [](const DyadicInterval& t) { return t.k < 1; });
        if (parts.empty()) continue;
        out.push_back({tau, parts[std::uniform_int_distribution<std::size_t>(0, parts.size() - 1)(rng)]});
    }
    return out;
}

} // namespace strz
