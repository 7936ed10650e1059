#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "strichartz/dyadic.hpp"

using namespace strz;

namespace {

using i128 = __int128;

// expand 2^{l-1}(x^l + y^l) - (x+y)^l and (x-y)^2 (x+y) sum b_n x^{m-n} y^n
// independently and compare coefficient by coefficient
bool identity_holds(int ell, const std::vector<std::int64_t>& b) {
    std::vector<i128> lhs(ell + 1, 0), rhs(ell + 1, 0);
    std::vector<i128> row{1};
    for (int i = 0; i < ell; ++i) { // Pascal row
        std::vector<i128> next(row.size() + 1, 0);
        for (std::size_t a = 0; a < row.size(); ++a) {
            next[a] += row[a];
            next[a + 1] += row[a];
        }
        row = next;
    }
    for (int i = 0; i <= ell; ++i) lhs[i] = -row[i];
    lhs[0] += i128(1) << (ell - 1);
    lhs[ell] += i128(1) << (ell - 1);
    std::vector<i128> poly(b.begin(), b.end());
    for (const std::vector<i128>& f : {std::vector<i128>{1, -1}, std::vector<i128>{1, -1}, std::vector<i128>{1, 1}}) {
        std::vector<i128> next(poly.size() + 1, 0);
        for (std::size_t a = 0; a < poly.size(); ++a) {
            next[a] += poly[a] * f[0];
            next[a + 1] += poly[a] * f[1];
        }
        poly = next;
    }
    if (static_cast<int>(poly.size()) != ell + 1) return false;
    for (int i = 0; i <= ell; ++i) rhs[i] = poly[i];
    return lhs == rhs;
}

std::vector<std::pair<DyadicInterval, DyadicInterval>> random_pairs(int depth, int count, unsigned seed, int j_lo,
                                                                    int j_hi) {
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

} // namespace

TEST_CASE("odd polynomial identity coefficients") {
    CHECK(p_coefficients(3).b == std::vector<std::int64_t>{3});
    CHECK(p_coefficients(5).b == std::vector<std::int64_t>{15, 10, 15});
    CHECK(p_coefficients(7).b == std::vector<std::int64_t>{63, 56, 98, 56, 63});
    CHECK(p_coefficients(7).max_index == 2);
    for (int ell = 3; ell <= 15; ell += 2) {
        CAPTURE(ell);
        auto co = p_coefficients(ell);
        CHECK(static_cast<int>(co.b.size()) == ell - 2);
        CHECK(identity_holds(ell, co.b));
        CHECK(p_coefficients_recursive(ell) == co.b);
        for (auto v : co.b) CHECK(v > 0);
        CHECK(co.b[co.max_index] == *std::max_element(co.b.begin(), co.b.end()));
    }
    CHECK_FALSE(identity_holds(5, {15, 11, 15}));
    CHECK_THROWS_AS(p_coefficients(4), ValidationError);
    CHECK_THROWS_AS(p_coefficients(17), ValidationError);
    CHECK_THROWS_AS(p_coefficients(1), ValidationError);
}

TEST_CASE("minimal adjacency depth") {
    CHECK(min_adjacency_depth(3) == 7);
    CHECK(min_adjacency_depth(5) == 11);
    CHECK(min_adjacency_depth(7) >= min_adjacency_depth(5));
    for (int ell = 3; ell <= 15; ell += 2) {
        int N = min_adjacency_depth(ell);
        CHECK(adjacency_lhs(ell, N) > adjacency_rhs(ell));
        CHECK_FALSE(adjacency_lhs(ell, N - 1) > adjacency_rhs(ell));
    }
    // N = 6 for ell = 3: 2^{12-6}/3 * (64/65) = 21.0 < 48
    CHECK(adjacency_lhs(3, 6) == doctest::Approx(64.0 / 3 * 64 / 65));
}

TEST_CASE("whitney relation") {
    CHECK_FALSE(whitney_related({0, 0}, {0, 1}, 1));
    CHECK_FALSE(whitney_related({0, 0}, {0, 1}, 5));
    CHECK(whitney_related({0, 0}, {0, 2}, 1));
    CHECK(whitney_related({0, 0}, {0, 128}, 7));
    CHECK_FALSE(whitney_related({0, 0}, {0, 128}, 6));
    CHECK_FALSE(whitney_related({0, 0}, {1, 2}, 1)); // scale mismatch
    CHECK_FALSE(whitney_related({0, 3}, {0, 3}, 2));
    CHECK(whitney_related({0, -1}, {0, -3}, 1));
    for (const auto& t : whitney_partners({2, 37}, 4, 1)) CHECK(whitney_related({2, 37}, t, 4));
    for (const auto& t : whitney_partners({2, 37}, 4, -1)) CHECK(whitney_related(t, {2, 37}, 4));
}

TEST_CASE("dyadic bounds") {
    CHECK(dyadic_bounds_check({0, 0}, {0, 128}, 7, 33).all());
    auto scaled = dyadic_bounds_check({10, 0}, {10, 128}, 7, 33);
    auto base = dyadic_bounds_check({0, 0}, {0, 128}, 7, 33);
    CHECK(scaled.point_bound == base.point_bound);
    CHECK(scaled.center_ratio == base.center_ratio);
    CHECK(scaled.sum_bounds == base.sum_bounds);
    CHECK(scaled.difference_bounds == base.difference_bounds);
    for (auto [t, tp] : random_pairs(7, 100, 3, -4, 6)) CHECK(dyadic_bounds_check(t, tp, 7).all());
    for (auto [t, tp] : random_pairs(11, 50, 4, -4, 2)) CHECK(dyadic_bounds_check(t, tp, 11).all());
    CHECK_THROWS_AS(dyadic_bounds_check({0, 0}, {0, 1}, 7), ValidationError);
    CHECK_THROWS_AS(dyadic_bounds_check({0, -2}, {0, 0}, 1), ValidationError);
}

TEST_CASE("parallelogram construction") {
    for (int ell : {3, 5}) {
        int d = min_adjacency_depth(ell);
        auto P = build_parallelogram(10, 12, CurveSpec::hom_odd(ell), d, 0.0);
        CHECK(P.A > adjacency_rhs(ell));
        CHECK(P.A < P.B);
        CHECK(P.eta_lo() == 10.0);
        CHECK(P.eta_hi() == 12.0);
        CHECK(P.g_lo() == P.A);
        CHECK(P.g_hi() == P.B);
    }
    auto P = build_parallelogram(5, 7, CurveSpec::hom_odd(3), 7, 0.0);
    CHECK(P.A == doctest::Approx(std::ldexp(1.0, 10) / 3 * 128.0 / 129));
    CHECK_THROWS_AS(build_parallelogram(0, 2, CurveSpec::hom_odd(3), 7, 0), ValidationError);
    CHECK_THROWS_AS(build_parallelogram(-3, -1, CurveSpec::hom_odd(3), 7, 0), ValidationError);
    CHECK_THROWS_AS(build_parallelogram(1, 2, CurveSpec::hom_even(4), 7, 0), ValidationError);
}

TEST_CASE("offset from the tangent matches the direct form") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.5, 4.0);
    for (auto c : {CurveSpec::hom_odd(3), CurveSpec::hom_odd(5), CurveSpec::inhom35()}) {
        for (int i = 0; i < 50; ++i) {
            long double x = u(rng), y = u(rng), cc = (x + y) * 1.01L;
            auto lin = [&](int ell, long double w) {
                return (std::pow(cc, ell) + ell * std::pow(cc, ell - 1) * ((x + y) - cc)) / w;
            };
            long double direct;
            if (c.kind == CurveKind::HomOdd) {
                int l = c.ell;
                direct = std::pow(x, l) + std::pow(y, l) - lin(l, std::ldexp(1.0L, l - 1));
            } else {
                direct = x * x * x + y * y * y + std::pow(x, 5) + std::pow(y, 5) - lin(3, 4) - lin(5, 16);
            }
            double v = offset_from_tangent(c, double(cc), double(x), double(y));
            CHECK(std::abs(v - double(direct)) < 1e-10 * std::abs(double(direct)) + 1e-12);
        }
    }
}

TEST_CASE("containment") {
    SUBCASE("random Whitney pairs") {
        struct Case {
            CurveSpec c;
            int depth;
        };
        for (auto cs : {Case{CurveSpec::hom_odd(3), 7}, Case{CurveSpec::hom_odd(5), 11}, Case{CurveSpec::inhom35(), 11}}) {
            CAPTURE(cs.c.encode());
            int ok = 0;
            for (auto [t, tp] : random_pairs(cs.depth, 100, 17, -6, 4)) ok += containment_check(t, tp, cs.c, cs.depth, 65);
            CHECK(ok == 100);
        }
    }
    SUBCASE("scaled small pair") {
        DyadicInterval t{-4, 16}, tp{-4, 16 + 128};
        REQUIRE(whitney_related(t, tp, 7));
        CHECK(containment_check(t, tp, CurveSpec::hom_odd(3), 7, 65));
    }
    SUBCASE("midpoint lies in the band") {
        DyadicInterval t{0, 3}, tp{0, 200};
        REQUIRE(whitney_related(t, tp, 7));
        auto P = build_parallelogram(t.lo() + tp.lo(), t.hi() + tp.hi(), CurveSpec::hom_odd(3), 7, 0);
        double G = offset_from_tangent(CurveSpec::hom_odd(3), P.c, t.center(), tp.center()) / P.D;
        CHECK(G >= P.A);
        CHECK(G <= P.B);
    }
    SUBCASE("negative control") {
        DyadicInterval t{0, 3}, tp{0, 200};
        Band b = band_constants(CurveSpec::hom_odd(3), 7);
        CHECK_FALSE(containment_check_band(t, tp, CurveSpec::hom_odd(3), 7, 65, {10 * b.B, b.A}));
    }
    SUBCASE("the literal upper band constant is too small") {
        int fails = 0;
        for (auto [t, tp] : random_pairs(7, 100, 17, -6, 4))
            fails += !containment_check(t, tp, CurveSpec::hom_odd(3), 7, 65, BandRule::Literal);
        CHECK(fails > 0);
        Band lit = band_constants(CurveSpec::hom_odd(3), 7, BandRule::Literal);
        Band cor = band_constants(CurveSpec::hom_odd(3), 7);
        CHECK(cor.A == lit.A);
        CHECK((cor.B - 6 * 3) == doctest::Approx(4 * (lit.B - 6 * 3)));
    }
    CHECK_THROWS_AS(containment_check({0, 1}, {0, 2}, CurveSpec::hom_odd(3), 7, 9), ValidationError);
}

TEST_CASE("dilation margin") {
    for (int ell : {3, 5}) {
        int d = min_adjacency_depth(ell);
        double beta = select_beta(CurveSpec::hom_odd(ell), d);
        CHECK(beta > 0);
        CHECK(beta <= 1);
        Band b = band_constants(CurveSpec::hom_odd(ell), d);
        auto taylor = [&](double be) {
            return ell * (ell - 1) / std::ldexp(1.0, ell) * std::pow(3 + 2 * be, ell - 2) * (1 + be) * (1 + be);
        };
        CHECK(b.A / 9 <= b.A - beta * (b.B - b.A) / 2 - taylor(beta));
        CHECK(4 * b.B + 2 * beta * (b.B - b.A) <= 5 * b.B);
        double over = beta * 1.001;
        bool lower = b.A / 9 <= b.A - over * (b.B - b.A) / 2 - taylor(over);
        bool upper = 4 * b.B + 2 * over * (b.B - b.A) <= 5 * b.B;
        CHECK_FALSE((lower && upper));
    }
    CHECK(select_beta(CurveSpec::inhom35(), 11) > 0);
    CHECK_THROWS_AS(select_beta(CurveSpec::hom_odd(3), 2), ValidationError);
}

TEST_CASE("parallelogram intersection") {
    auto c = CurveSpec::hom_odd(3);
    auto P = build_parallelogram(100, 102, c, 7, 0.0);
    CHECK(parallelograms_intersect(P, P));
    CHECK_FALSE(parallelograms_intersect(P, build_parallelogram(200, 202, c, 7, 0.0)));
    CHECK(parallelograms_intersect(P, build_parallelogram(101, 103, c, 7, 0.0)));
    // same eta range, band shifted far above
    auto Q = P;
    Q.K0 += 10 * (P.B * P.D);
    CHECK_FALSE(parallelograms_intersect(P, Q));
}

TEST_CASE("cover multiplicity") {
    auto c = CurveSpec::hom_odd(3);
    double beta = select_beta(c, 7);
    CHECK(cover_multiplicity(c, 1, 0.0, {0, 0, 1, 4}).multiplicity == 1);
    auto a = cover_multiplicity(c, 7, beta, {0, 4, 1, 4096});
    auto b = cover_multiplicity(c, 7, beta, {4, 8, 16, 65536});
    CHECK(a.pairs > 0);
    CHECK(a.pairs == b.pairs);
    CHECK(a.multiplicity == b.multiplicity);
    CHECK(a.multiplicity < a.pairs);
    CHECK(cover_multiplicity(c, 7, 2 * beta, {0, 4, 1, 4096}).multiplicity >= a.multiplicity);
    CHECK_THROWS_AS(cover_multiplicity(c, 7, beta, {3, 2, 1, 4096}), ValidationError);
    CHECK_THROWS_AS(cover_multiplicity(c, 7, beta, {0, 0, 8, 4}), ValidationError);
}
