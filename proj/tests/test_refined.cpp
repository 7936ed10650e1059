#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "strichartz/refined.hpp"
#include "support.hpp"

using namespace strz;
using namespace testing_support;

namespace {

// (1/4pi^2) int int m^2 m'^2 |u|^2 |v|^2 / |phi'(xi) - phi'(xi')|, the L^2 norm
// of a product of extensions with separated spectra over all of R^2
double bilinear_l2_oracle(const CurveSpec& c, const SampledFunction& u, const SampledFunction& v) {
    const Grid1D& g = u.grid();
    double acc = 0.0;
    for (int a = 0; a < g.n; ++a) {
        double pa = std::norm(u.freq()[a]);
        if (pa == 0.0) continue;
        for (int b = 0; b < g.n; ++b) {
            double pb = std::norm(v.freq()[b]);
            if (pb == 0.0) continue;
            double x = g.xi(a), y = g.xi(b);
            double m = c.weight(x) * c.weight(y);
            acc += m * m * pa * pb / std::abs(c.phase_d1(x) - c.phase_d1(y));
        }
    }
    return std::sqrt(acc * g.dxi() * g.dxi()) / (2 * std::numbers::pi);
}

// value of one cell straight from the definition
double cell_value(const CurveSpec& c, const SampledFunction& f, const DyadicInterval& cell, const SpaceTimeGrid& sg) {
    auto F = extend(c, restrict_to_cell(f, cell), sg);
    double mx = 0.0;
    for (const auto& v : F.values) mx = std::max(mx, std::abs(v));
    return mx / (c.weight(cell.center()) * std::sqrt(cell.length()));
}

} // namespace

TEST_CASE("cell restriction") {
    Grid1D g = Grid1D::make(32, 512);
    auto f = random_band(g, 1.0, 3.0, 5);
    CHECK(l2_norm(restrict_to_cell(f, {2, 0}) - f) == 0.0);
    auto a = restrict_to_cell(f, {0, 1}), b = restrict_to_cell(f, {0, 2});
    CHECK(std::abs(inner(a, b)) < 1e-12);
    CHECK(l2_norm(a) <= l2_norm(f));
    CHECK(l2_norm(restrict_to_cell(f, {0, 40})) == 0.0);
    auto cr = make_cell_restriction(f, {0, 1});
    CHECK(cr.cell == DyadicInterval{0, 1});
    CHECK(l2_norm(cr.restricted - a) == 0.0);
    CHECK(cell_mass(f, {0, 1}) == doctest::Approx(l2_norm(a) * l2_norm(a)).epsilon(1e-10));

    SUBCASE("partition consistency") {
        auto h = random_band(g, -20.0, 20.0, 6);
        for (int j : {-2, 0, 3}) {
            const double w = std::ldexp(1.0, j);
            SampledFunction sum = SampledFunction::zero(g);
            for (std::int64_t k = std::int64_t(std::floor(-g.xi_max() / w)) - 1; k * w <= g.xi_max() + w; ++k)
                sum = sum + restrict_to_cell(h, {j, k});
            double worst = 0.0;
            for (int k = 0; k < g.n; ++k) worst = std::max(worst, std::abs(sum.freq()[k] - h.freq()[k]));
            CHECK(worst == 0.0);
        }
    }
    SUBCASE("cells meeting the spectrum") {
        auto cells = cells_meeting_spectrum(f, {0, 1});
        for (std::size_t i = 1; i < cells.size(); ++i)
            CHECK(std::make_pair(cells[i - 1].j, cells[i - 1].k) < std::make_pair(cells[i].j, cells[i].k));
        for (const auto& c : cells) CHECK(cell_mass(f, c) > 0);
        CHECK(cells_meeting_spectrum(SampledFunction::zero(g), {0, 1}).empty());
        CHECK_THROWS_AS(cells_meeting_spectrum(f, {2, 1}), ValidationError);
    }
}

TEST_CASE("bilinear ratio") {
    const auto c = CurveSpec::inhom35();
    Grid1D g = Grid1D::make(32, 2048);
    DyadicInterval tau{0, 8}, taup{0, 10};
    auto u = random_cell_input(g, tau, 1), v = random_cell_input(g, taup, 2);

    CHECK(bilinear_normalizer(c, tau, 3.0) == 1.0);
    CHECK(bilinear_normalizer(CurveSpec::hom_odd(5), tau, 3.0) == 1.0);
    CHECK(bilinear_normalizer(c, tau, 2.0) == doctest::Approx(std::pow(8.5 + std::pow(8.5, 3), -1.0 / 6)));
    CHECK(bilinear_ratio(c, SampledFunction::zero(g), v, tau, taup, 2.0) == 0.0);
    CHECK(bilinear_ratio(c, u, SampledFunction::zero(g), tau, taup, 2.0) == 0.0);
    CHECK_THROWS_AS(bilinear_ratio(c, u, v, tau, taup, 1.5), ValidationError);
    CHECK_THROWS_AS(bilinear_ratio(c, u, v, tau, {0, 9}, 2.0), ValidationError);
    CHECK_THROWS_AS(bilinear_ratio(c, u, v, tau, {1, 5}, 2.0), ValidationError);
    CHECK_THROWS_AS(bilinear_ratio(c, u, v, {0, -3}, {0, 1}, 2.0), ValidationError);
    CHECK_THROWS_AS(bilinear_normalizer(CurveSpec::schrod(1, 1), tau, 2.0), ValidationError);

    SUBCASE("one transit period reproduces the whole-plane L2 norm") {
        for (auto curve : {c, CurveSpec::hom_odd(3)}) {
            auto sg = transit_grid(curve, g, tau, taup);
            double num = bilinear_numerator(curve, u, v, tau, taup, 2.0, sg);
            CHECK(rel_diff(num, bilinear_l2_oracle(curve, u, v)) < 0.03);
        }
    }
    SUBCASE("numerators are symmetric") {
        auto sg = transit_grid(c, g, tau, taup);
        for (double q : {2.0, 3.0}) {
            double a = bilinear_numerator(c, u, v, tau, taup, q, sg);
            double b = bilinear_numerator(c, v, u, taup, tau, q, sg);
            CHECK(rel_diff(a, b) < 1e-12);
        }
    }
    SUBCASE("ratio stays within a factor 4 over scales") {
        double lo = INFINITY, hi = 0.0;
        for (int j = 0; j <= 3; ++j) {
            DyadicInterval t{j, std::int64_t(8 >> j)};
            auto tp = whitney_partners(t, 1, 1).front();
            double r = bilinear_ratio(c, random_cell_input(g, t, 10 + j), random_cell_input(g, tp, 20 + j), t, tp, 2.0);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        CHECK(hi / lo < 4.0);
    }
}

TEST_CASE("quasi-orthogonality") {
    const auto c = CurveSpec::inhom35();
    Grid1D g = Grid1D::make(64, 1024);
    auto sg = SpaceTimeGrid::uniform(0.5, 128, g);
    auto z = quasi_orthogonality_gap(c, SampledFunction::zero(g), 1, {0, 0}, sg);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);

    auto pair = random_cell_input(g, {0, 2}, 3) + random_cell_input(g, {0, 4}, 4);
    auto one = quasi_orthogonality_gap(c, pair, 1, {0, 0}, sg);
    CHECK(one.pairs == 1);
    CHECK(rel_diff(one.lhs, one.rhs) < 1e-12);

    CHECK_THROWS_AS(quasi_orthogonality_gap(c, random_band_input(g, -2, 2, 1), 1, {0, 0}, sg), ValidationError);
    CHECK_THROWS_AS(quasi_orthogonality_gap(c, pair, 0, {0, 0}, sg), ValidationError);

    for (int s = 0; s < 5; ++s) {
        auto f = random_band_input(g, 1.0, 9.0, 100 + s);
        auto q = quasi_orthogonality_gap(c, f, 1, {-1, 1}, sg);
        CHECK(q.pairs > 10);
        CHECK(q.lhs <= 10 * q.rhs);
    }
    auto neg = quasi_orthogonality_gap(c, random_band_input(g, -9.0, -1.0, 7), 1, {-1, 1}, sg);
    CHECK(neg.pairs > 10);
}

TEST_CASE("refined functional") {
    const auto c = CurveSpec::inhom35();
    Grid1D g = Grid1D::make(64, 1024);
    auto sg = SpaceTimeGrid::uniform(0.1, 32, g);

    auto zero = refined_functional(c, SampledFunction::zero(g), {0, 2}, sg);
    CHECK(zero.functional_value == 0.0);
    CHECK(zero.constant_estimate == 0.0);
    CHECK_THROWS_AS(refined_functional(c, SampledFunction::zero(g), {0, 2}, sg, 1.5), ValidationError);

    SUBCASE("single bump") {
        auto f = random_cell_input(g, {0, 5}, 8);
        auto r = refined_functional(c, f, {0, 0}, sg);
        CHECK(r.best_cell == DyadicInterval{0, 5});
        CHECK(r.functional_value == doctest::Approx(cell_value(c, f, {0, 5}, sg)).epsilon(1e-12));
    }
    SUBCASE("matches a direct comparison of cell values") {
        auto f = random_band_input(g, -3.0, 5.0, 9);
        auto r = refined_functional(c, f, {-1, 1}, sg);
        double best = 0.0;
        DyadicInterval arg;
        for (int j = -1; j <= 1; ++j)
            for (std::int64_t k = -8; k <= 16; ++k) {
                DyadicInterval cell{j, k};
                if (cell_mass(f, cell) <= 0) continue;
                double v = cell_value(c, f, cell, sg);
                if (v > best) best = v, arg = cell;
            }
        CHECK(r.best_cell == arg);
        CHECK(r.functional_value == doctest::Approx(best).epsilon(1e-12));
        double l6 = extend_lp_norm(c, f, sg, 6);
        CHECK(r.extension_l6 == doctest::Approx(l6).epsilon(1e-12));
        CHECK(r.constant_estimate == doctest::Approx(l6 / (std::pow(best, 1.0 / 3) * std::pow(l2_norm(f), 2.0 / 3))));
    }
    SUBCASE("dilation moves the best cell by two scales") {
        // homogeneous curve: the normalized value is dilation invariant once time is rescaled by h^3
        auto h3 = CurveSpec::hom_odd(3);
        auto f = packet_input(g, 2.0, 1.0, 0.0);
        auto base = refined_functional(h3, f, {-1, 3}, SpaceTimeGrid::instants({-0.02, 0.0, 0.03}, g));
        auto fs = rescale(f, 0.25);
        auto moved = refined_functional(h3, fs, {1, 5}, SpaceTimeGrid::instants({-0.02 / 64, 0.0, 0.03 / 64}, g));
        CHECK(moved.best_cell.j == base.best_cell.j + 2);
        CHECK(moved.best_cell.k == base.best_cell.k);
        CHECK(rel_diff(moved.functional_value, base.functional_value) < 1e-2);
    }
}

TEST_CASE("detector study") {
    DetectorConfig cfg;
    cfg.n_random = 8;
    cfg.n_concentrated = 4;
    auto st = run_detector_study(cfg);
    CHECK(st.covered);
    CHECK(st.random.size() == 8);
    CHECK(st.concentrated.size() == 4);
    CHECK(st.median_random > 0);
    CHECK(st.min_concentrated_over_median > 5.0);
    cfg.n_random = 0;
    CHECK_THROWS_AS(run_detector_study(cfg), ValidationError);
}
