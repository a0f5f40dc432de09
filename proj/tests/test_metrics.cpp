#include <doctest.h>

#include <cmath>

#include "capprop/diffusion.hpp"
#include "capprop/stats.hpp"

using namespace capprop;

TEST_CASE("profile_stats examples") {
    const Grid g = Grid::line(32);

    const ProfileStats one = profile_stats(make_one_hot(g, 7));
    CHECK(one.mass == 1.0);
    CHECK(one.centroid[0] == 7.0);
    CHECK(one.std_width == 0.0);

    CapacityProfile pair(g, 1);
    pair.at(0, 9) = 0.5;
    pair.at(0, 11) = 0.5;
    const ProfileStats two = profile_stats(pair);
    CHECK(two.centroid[0] == 10.0);
    CHECK(two.std_width == 1.0);

    CHECK_THROWS_AS(profile_stats(CapacityProfile(g, 1)), std::invalid_argument);
}

TEST_CASE("profile_stats: wrapped support and translation invariance") {
    const Grid g = Grid::line(16);
    CapacityProfile wrap(g, 1);
    wrap.at(0, 15) = 0.5;
    wrap.at(0, 0) = 0.5;
    const ProfileStats s = profile_stats(wrap);
    CHECK(s.centroid[0] == 15.5);
    CHECK(s.std_width == 0.5);

    // Support spanning more than half the domain is ambiguous.
    CapacityProfile wide(g, 1);
    for (int i = 0; i < 9; ++i) wide.at(0, i) = 1.0;
    CHECK_THROWS_AS(profile_stats(wide), std::invalid_argument);

    // Periodic shift moves the centroid and preserves mass/width.
    const Grid big = Grid::line(64);
    CapacityProfile a(big, 1);
    a.at(0, 10) = 0.2;
    a.at(0, 12) = 0.5;
    a.at(0, 15) = 0.3;
    CapacityProfile b(big, 1);
    for (int i = 0; i < 64; ++i)
        if (a.at(0, i) != 0.0) b.at(0, (i + 60) % 64) = a.at(0, i);
    const ProfileStats sa = profile_stats(a);
    const ProfileStats sb = profile_stats(b);
    CHECK(sb.mass == doctest::Approx(sa.mass).epsilon(1e-14));
    CHECK(sb.std_width == doctest::Approx(sa.std_width).epsilon(1e-12));
    CHECK(std::fmod(sb.centroid[0] - sa.centroid[0] + 64.0, 64.0) ==
          doctest::Approx(60.0).epsilon(1e-12));
}

TEST_CASE("profile_stats: sampled gaussian variance matches 2Dt within 1%") {
    const Grid g = Grid::line(512);
    const CapacityProfile init = make_one_hot(g, 256);
    const CapacityProfile out = heat_kernel_solution(DiffusionModel::constant(2.0, init), 1.0);
    const ProfileStats s = profile_stats(out);
    CHECK(std::fabs(s.std_width * s.std_width - 4.0) / 4.0 < 0.01);
}

TEST_CASE("quantile_width") {
    const Grid g = Grid::line(64);
    CHECK(quantile_width(make_one_hot(g, 20), 0.5) == 0.0);
    CHECK(quantile_width(make_one_hot(g, 20), 1.0) == 0.0);

    const CapacityProfile out = heat_kernel_solution(
        DiffusionModel::constant(2.0, make_one_hot(Grid::line(512), 256)), 1.0);
    const double q50 = quantile_width(out, 0.5);
    const double q99 = quantile_width(out, 0.99);
    CHECK(q50 > 0.0);
    CHECK(q99 >= q50);
    CHECK_THROWS_AS(quantile_width(out, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quantile_width(out, 1.5), std::invalid_argument);
}

TEST_CASE("lp_error examples and metric axioms") {
    const Grid g = Grid::line(16);
    const CapacityProfile a = make_one_hot(g, 4);
    const CapacityProfile b = make_one_hot(g, 9);
    CHECK(lp_error(a, a, Norm::l1) == 0.0);
    CHECK(lp_error(a, b, Norm::l1) == 2.0);
    CHECK(lp_error(a, b, Norm::linf) <= lp_error(a, b, Norm::l1));
    CHECK(lp_error(a, b, Norm::l2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(lp_error(a, b, Norm::l1) == lp_error(b, a, Norm::l1));

    // Triangle inequality spot-check over a few random-ish profiles.
    CapacityProfile c(g, 1);
    for (int i = 0; i < 16; ++i) c.at(0, i) = (i * 7 % 5) * 0.1;
    for (Norm norm : {Norm::l1, Norm::l2, Norm::linf})
        CHECK(lp_error(a, b, norm) <= lp_error(a, c, norm) + lp_error(c, b, norm) + 1e-15);

    CHECK_THROWS_AS(lp_error(a, CapacityProfile(Grid::line(8), 1), Norm::l1),
                    std::invalid_argument);
}

TEST_CASE("fit_power_law examples") {
    const PowerLawFit half = fit_power_law({{1.0, 2.0}, {2.0, 2.0 * std::sqrt(2.0)}, {4.0, 4.0}});
    CHECK(half.exponent == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(half.prefactor == doctest::Approx(2.0).epsilon(1e-12));

    const PowerLawFit flat = fit_power_law({{1.0, 3.0}, {2.0, 3.0}, {4.0, 3.0}});
    CHECK(flat.exponent == doctest::Approx(0.0).epsilon(1e-12));

    std::vector<std::pair<double, double>> inv;
    for (double x : {1.0, 2.0, 4.0, 8.0}) inv.emplace_back(x, 7.0 / x);
    const PowerLawFit m1 = fit_power_law(inv);
    CHECK(std::fabs(m1.exponent + 1.0) <= 1e-12);
    CHECK(m1.prefactor == doctest::Approx(7.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, -1.0}}), std::invalid_argument);
}

TEST_CASE("2D stats") {
    const Grid g = Grid::plane(16, 16);
    CapacityProfile p(g, 1);
    p.at(0, g.index(4, 8)) = 0.5;
    p.at(0, g.index(6, 8)) = 0.5;
    const ProfileStats s = profile_stats(p);
    CHECK(s.centroid[0] == 5.0);
    CHECK(s.centroid[1] == 8.0);
    CHECK(s.std_width == 1.0);
}
