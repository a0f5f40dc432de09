#include <doctest.h>

#include <cmath>
#include <cstring>

#include "capprop/diffusion.hpp"
#include "capprop/propagate.hpp"
#include "capprop/stats.hpp"

using namespace capprop;

namespace {

ArchitectureSpec residual_spec(int depth, double c = 1.0, double p = 1.0) {
    ArchitectureSpec spec;
    spec.variant = Variant::residual;
    spec.depth = depth;
    spec.capacity_rate = c;
    spec.scaling_exponent = p;
    spec.generators = {StencilGenerator::symmetric_unit(1)};
    return spec;
}

/// Independent oracle: dense column-stochastic matrix built entrywise, then
/// plain matrix-vector products.
std::vector<double> dense_propagate(const StencilGenerator& gen, double eps, int n, int steps,
                                    const std::vector<double>& input) {
    std::vector<double> matrix(static_cast<std::size_t>(n) * n, 0.0);
    for (int x = 0; x < n; ++x) matrix[static_cast<std::size_t>(x) * n + x] = 1.0 - eps;
    for (std::size_t i = 0; i < gen.size(); ++i)
        for (int x = 0; x < n; ++x) {
            const int src = ((x + gen.offsets()[i].dx) % n + n) % n;
            matrix[static_cast<std::size_t>(x) * n + src] += eps * gen.rates()[i];
        }
    std::vector<double> v = input;
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int k = 0; k < steps; ++k) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int y = 0; y < n; ++y) acc += matrix[static_cast<std::size_t>(x) * n + y] * v[y];
            next[x] = acc;
        }
        v = next;
    }
    return v;
}

} // namespace

TEST_CASE("build_operator: direct arithmetic and preconditions") {
    const Grid g = Grid::line(9);
    const StencilGenerator gen = StencilGenerator::symmetric_unit(1);
    const CapacityProfile p = make_one_hot(g, 4);
    const CapacityProfile out = apply_operator(build_operator(gen, 0.1), p);
    CHECK(out.at(0, 4) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(out.at(0, 3) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(out.at(0, 5) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(out.total_mass() == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(build_operator(gen, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_operator(gen, 1.5), std::invalid_argument);
}

TEST_CASE("operator wraps periodically and leaks on absorbing edges") {
    const StencilGenerator gen = StencilGenerator::symmetric_unit(1);
    const CapacityProfile edge = make_one_hot(Grid::line(8), 0);
    const CapacityProfile wrapped = apply_operator(build_operator(gen, 0.5), edge);
    CHECK(wrapped.at(0, 7) == doctest::Approx(0.25));
    CHECK(wrapped.total_mass() == doctest::Approx(1.0).epsilon(1e-15));

    const CapacityProfile edge_abs = make_one_hot(Grid::line(8, Boundary::absorbing), 0);
    const CapacityProfile lost = apply_operator(build_operator(gen, 0.5), edge_abs);
    CHECK(lost.total_mass() == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("weights_from_operator duality") {
    const StencilGenerator gen(1, {{1, 0}}, {1.0});
    const WeightStencil w = weights_from_operator(gen, 0.04, RngSpec{3});
    CHECK(std::fabs(w.weights[1]) == doctest::Approx(0.2).epsilon(1e-15));

    // Squared weights reproduce the operator coefficients bit-exactly.
    const StencilGenerator gen2 = random_generator(RngSpec{11}, 2, 1);
    const double eps = 0.3;
    const WeightStencil w2 = weights_from_operator(gen2, eps, RngSpec{4});
    CHECK(w2.capacity_coefficients[0] == 1.0 - eps);
    for (std::size_t i = 0; i < gen2.size(); ++i) {
        CHECK(w2.capacity_coefficients[i + 1] == eps * gen2.rates()[i]);
        CHECK(w2.weights[i + 1] * w2.weights[i + 1] ==
              doctest::Approx(w2.capacity_coefficients[i + 1]).epsilon(1e-15));
    }

    // Scaling epsilon by 1/4 halves the off-diagonal weights exactly.
    const WeightStencil w4 = weights_from_operator(gen2, eps / 4.0, RngSpec{4});
    for (std::size_t i = 1; i < w2.weights.size(); ++i)
        CHECK(std::fabs(w4.weights[i]) == std::fabs(w2.weights[i]) / 2.0);
}

TEST_CASE("propagate_residual: single step base case and shape checks") {
    const Grid g = Grid::line(16);
    const CapacityProfile p = make_one_hot(g, 8);
    const ArchitectureSpec spec = residual_spec(2);
    const Trajectory traj = propagate_residual(spec, p);
    CHECK(traj.size() == 2);
    const CapacityProfile one = apply_operator(build_operator(spec.generators[0], 1.0), p);
    for (int i = 0; i < g.sites(); ++i) CHECK(traj.final_profile().at(0, i) == one.at(0, i));

    ArchitectureSpec bad = residual_spec(4);
    bad.variant = Variant::leak;
    CHECK_THROWS_AS(propagate_residual(bad, p), std::invalid_argument);
}

TEST_CASE("variance law matches brute-force enumeration (n=32, L=8)") {
    const int n = 32, depth = 8;
    const Grid g = Grid::line(n);
    const CapacityProfile init = make_one_hot(g, n / 2);
    const ArchitectureSpec spec = residual_spec(depth);
    const double eps = spec.epsilon();
    const double m2 = spec.generators[0].second_moment().scalar();
    const Trajectory traj = propagate_residual(spec, init);

    std::vector<double> iv(init.values().begin(), init.values().end());
    for (int k = 0; k <= spec.steps(); ++k) {
        const auto dense = dense_propagate(spec.generators[0], eps, n, k, iv);
        for (int i = 0; i < n; ++i)
            CHECK(traj.profiles[k].at(0, i) == doctest::Approx(dense[i]).epsilon(1e-13));
        if (k > 0) {
            const ProfileStats stats = profile_stats(traj.profiles[k]);
            const double expected = eps * m2 * k;
            CHECK(std::fabs(stats.std_width * stats.std_width - expected) < 1e-10);
        }
    }
}

TEST_CASE("variance law for random symmetric stencils") {
    const StencilGenerator gen = random_symmetric_generator(RngSpec{21}, 2, 1);
    ArchitectureSpec spec = residual_spec(33, 0.8);
    spec.generators = {gen};
    const Grid g = Grid::line(128);
    const Trajectory traj = propagate_residual(spec, make_one_hot(g, 64));
    const double m2 = gen.second_moment().scalar();
    for (int k = 1; k <= spec.steps(); ++k) {
        const ProfileStats stats = profile_stats(traj.profiles[k]);
        CHECK(std::fabs(stats.std_width * stats.std_width - spec.epsilon() * m2 * k) < 1e-10);
    }
}

TEST_CASE("residual chain converges to the lattice diffusion limit") {
    const Grid g = Grid::line(256);
    const CapacityProfile init = make_one_hot(g, 128);
    const CapacityProfile limit = semigroup_solution(StencilGenerator::symmetric_unit(1), 1.0, 1.0, init);
    double prev = 1e9;
    for (int depth : {17, 65, 257}) {
        const Trajectory traj = propagate_residual(residual_spec(depth), init);
        const double err = lp_error(traj.final_profile(), limit, Norm::l1);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 2e-3);
}

TEST_CASE("mass conservation and nonnegativity over 1000+ steps") {
    const Grid g = Grid::line(200);
    const StencilGenerator gen = random_symmetric_generator(RngSpec{5}, 2, 1);
    ArchitectureSpec spec = residual_spec(1025, 2.0);
    spec.generators = {gen};
    const Trajectory traj = propagate_residual(spec, make_one_hot(g, 100));
    CHECK(std::fabs(traj.final_profile().total_mass() - 1.0) <= 1e-12);
    for (double v : traj.final_profile().values()) CHECK(v >= 0.0);
}

TEST_CASE("symmetric input stays symmetric") {
    const Grid g = Grid::line(65);
    ArchitectureSpec spec = residual_spec(17);
    const Trajectory traj = propagate_residual(spec, make_one_hot(g, 32));
    for (const auto& p : traj.profiles)
        for (int d = 1; d <= 32; ++d) CHECK(p.at(0, 32 - d) == p.at(0, 32 + d));
}

TEST_CASE("propagate_with_source: zero source, mass balance, pulse equivalence") {
    const Grid g = Grid::line(64);
    ArchitectureSpec spec = residual_spec(33);
    spec.variant = Variant::skip_source;

    SUBCASE("zero source gives a zero trajectory") {
        const Trajectory traj =
            propagate_with_source(spec, [&](double) { return CapacityProfile(g, 1); });
        for (const auto& p : traj.profiles) CHECK(p.total_mass() == 0.0);
    }

    SUBCASE("constant one-hot source accumulates k*dt of mass") {
        const CapacityProfile bump = make_one_hot(g, 32);
        const Trajectory traj = propagate_with_source(spec, [&](double) { return bump; });
        for (std::size_t k = 0; k < traj.size(); ++k)
            CHECK(std::fabs(traj.profiles[k].total_mass() - static_cast<double>(k) * traj.dt) <=
                  1e-12);
    }

    SUBCASE("a single pulse at t=0 then evolves like propagate_residual") {
        const CapacityProfile bump = make_one_hot(g, 32);
        const Trajectory traj = propagate_with_source(
            spec, [&](double t) { return t == 0.0 ? bump : CapacityProfile(g, 1); });
        CapacityProfile scaled(g, 1);
        scaled.at(0, 32) = traj.dt;
        const Trajectory ref = propagate_residual(residual_spec(33), scaled);
        // profiles[k+1] of the source run equals profiles[k] of the residual run.
        for (std::size_t k = 0; k + 1 < traj.size(); ++k)
            CHECK(lp_error(traj.profiles[k + 1], ref.profiles[k], Norm::linf) <= 1e-15);
    }

    SUBCASE("negative source rejected") {
        CHECK_THROWS_AS(propagate_with_source(spec,
                                              [&](double) {
                                                  CapacityProfile p(g, 1);
                                                  p.values()[3] = -1.0;
                                                  return p;
                                              }),
                        std::invalid_argument);
    }
}

TEST_CASE("propagate_with_leak: split, conservation, exponential limit") {
    const Grid g = Grid::line(64);
    const CapacityProfile init = make_one_hot(g, 32);

    SUBCASE("alpha = 0 reduces to propagate_residual") {
        ArchitectureSpec spec = residual_spec(17);
        spec.variant = Variant::leak;
        const LeakResult result = propagate_with_leak(spec, init);
        const Trajectory ref = propagate_residual(residual_spec(17), init);
        for (std::size_t k = 0; k < ref.size(); ++k)
            CHECK(lp_error(result.trajectory.profiles[k], ref.profiles[k], Norm::linf) == 0.0);
        for (const auto& side : result.side_capacities) CHECK(side.total_mass() == 0.0);
    }

    SUBCASE("conservation of the full split") {
        ArchitectureSpec spec = residual_spec(129);
        spec.variant = Variant::leak;
        spec.leak = LeakSchedule::piecewise({0.0, 0.25, 0.75}, {0.5, 2.0, 0.1});
        const LeakResult result = propagate_with_leak(spec, init);
        const double total = result.input_capacity.total_mass() + result.total_side_mass();
        CHECK(std::fabs(total - 1.0) <= 1e-12);
    }

    SUBCASE("constant alpha approaches exp(-a c), checked against the exact product") {
        const int depth = 257;
        ArchitectureSpec spec = residual_spec(depth);
        spec.variant = Variant::leak;
        spec.leak = LeakSchedule::constant(1.0);
        const LeakResult result = propagate_with_leak(spec, init);
        const double mass_x = result.input_capacity.total_mass();

        long double product = 1.0L;
        const long double rate = static_cast<long double>(spec.epsilon());
        for (int k = 0; k < depth - 1; ++k) product *= (1.0L - rate);
        CHECK(mass_x == doctest::Approx(static_cast<double>(product)).epsilon(1e-12));
        CHECK(std::fabs(mass_x / std::exp(-1.0) - 1.0) < 0.01);
    }

    SUBCASE("alpha * epsilon above 1 is rejected") {
        ArchitectureSpec spec = residual_spec(3); // epsilon = 0.5
        spec.variant = Variant::leak;
        spec.leak = LeakSchedule::constant(3.0);
        CHECK_THROWS_AS(propagate_with_leak(spec, init), std::invalid_argument);
    }
}

TEST_CASE("propagate_dilated: schedule, variance, grid fit") {
    SUBCASE("lambda = 1 is identical to propagate_residual") {
        const Grid g = Grid::line(64);
        const CapacityProfile init = make_one_hot(g, 32);
        ArchitectureSpec spec = residual_spec(9);
        spec.variant = Variant::dilated;
        spec.dilation_ratio = 1.0;
        const Trajectory a = propagate_dilated(spec, init);
        const Trajectory b = propagate_residual(residual_spec(9), init);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(lp_error(a.profiles[k], b.profiles[k], Norm::linf) == 0.0);
    }

    SUBCASE("lambda = 2, L = 4: variance 21 * eps, cross-checked densely") {
        const int n = 128;
        const Grid g = Grid::line(n);
        ArchitectureSpec spec = residual_spec(4);
        spec.variant = Variant::dilated;
        spec.dilation_ratio = 2.0;
        const double eps = spec.epsilon();
        const Trajectory traj = propagate_dilated(spec, make_one_hot(g, 64));
        const ProfileStats stats = profile_stats(traj.final_profile());
        CHECK(std::fabs(stats.std_width * stats.std_width - 21.0 * eps) < 1e-12);

        // Dense oracle applying each dilated step as its own matrix.
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        v[64] = 1.0;
        for (int k = 0; k < 3; ++k) {
            const int d = 1 << k;
            const StencilGenerator step(1, {{d, 0}, {-d, 0}}, {0.5, 0.5});
            v = dense_propagate(step, eps, n, 1, v);
        }
        for (int i = 0; i < n; ++i)
            CHECK(traj.final_profile().at(0, i) == doctest::Approx(v[i]).epsilon(1e-13));
    }

    SUBCASE("dilation exceeding the grid is rejected") {
        ArchitectureSpec spec = residual_spec(12);
        spec.variant = Variant::dilated;
        spec.dilation_ratio = 2.0;
        CHECK_THROWS_AS(propagate_dilated(spec, make_one_hot(Grid::line(64), 32)),
                        std::invalid_argument);

        // Astronomically deep schedules must be rejected, not overflow.
        ArchitectureSpec deep = residual_spec(1024);
        deep.variant = Variant::dilated;
        deep.dilation_ratio = 2.0;
        CHECK_THROWS_AS(propagate_dilated(deep, make_one_hot(Grid::line(4096), 2048)),
                        std::invalid_argument);
    }

    SUBCASE("absorbing boundaries lose mass through the edges") {
        ArchitectureSpec spec = residual_spec(33, 1.0);
        const Grid g = Grid::line(16, Boundary::absorbing);
        const Trajectory traj = propagate_residual(spec, make_one_hot(g, 8));
        double prev = 1.0;
        for (const auto& p : traj.profiles) {
            const double m = p.total_mass();
            CHECK(m <= prev * (1.0 + 1e-15));
            prev = m;
        }
        CHECK(traj.final_profile().total_mass() < 1.0);
    }
}

TEST_CASE("propagate_multichannel: degenerate C, collapse identity, Xavier") {
    const Grid g = Grid::line(32);

    SUBCASE("C = 1 equals propagate_residual") {
        ArchitectureSpec spec = residual_spec(9);
        spec.variant = Variant::multichannel;
        spec.channels = 1;
        spec.channel_blocks = {spec.generators[0]};
        spec.generators.clear();
        const CapacityProfile init = make_one_hot(g, 16);
        const Trajectory a = propagate_multichannel(spec, init);
        const Trajectory b = propagate_residual(residual_spec(9), init);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(lp_error(a.profiles[k], b.profiles[k], Norm::linf) <= 1e-15);
    }

    SUBCASE("channel-uniform blocks collapse to the single-channel run (C=3, n=32, L=8)") {
        const int C = 3;
        ArchitectureSpec spec = residual_spec(8);
        spec.variant = Variant::multichannel;
        spec.channels = C;
        spec.channel_blocks.assign(9, StencilGenerator::symmetric_unit(1));
        spec.generators.clear();

        CapacityProfile init(g, C);
        init.at(0, 16) = 0.4;
        init.at(1, 10) = 0.3;
        init.at(2, 20) = 0.3;
        const Trajectory mc = propagate_multichannel(spec, init);
        const Trajectory ref = propagate_residual(residual_spec(8), collapse_channels(init));
        for (std::size_t k = 0; k < mc.size(); ++k)
            CHECK(lp_error(collapse_channels(mc.profiles[k]), ref.profiles[k], Norm::l1) <= 1e-12);
    }

    SUBCASE("doubling C at fixed c leaves the collapsed profile unchanged") {
        auto run = [&](int C) {
            ArchitectureSpec spec = residual_spec(17);
            spec.variant = Variant::multichannel;
            spec.channels = C;
            spec.channel_blocks.assign(static_cast<std::size_t>(C) * C,
                                       StencilGenerator::symmetric_unit(1));
            spec.generators.clear();
            return collapse_channels(
                propagate_multichannel(spec, make_one_hot(g, 16, 0, C)).final_profile());
        };
        CHECK(lp_error(run(2), run(4), Norm::l1) <= 1e-12);
    }

    SUBCASE("block table shape is validated") {
        ArchitectureSpec spec = residual_spec(9);
        spec.variant = Variant::multichannel;
        spec.channels = 3;
        spec.channel_blocks.assign(4, StencilGenerator::symmetric_unit(1));
        spec.generators.clear();
        CHECK_THROWS_AS(propagate_multichannel(spec, make_one_hot(g, 16, 0, 3)),
                        std::invalid_argument);
    }
}

TEST_CASE("propagate_recurrent: shared stepping with the leak machinery") {
    const Grid g = Grid::line(48);
    const CapacityProfile init = make_one_hot(g, 24);

    ArchitectureSpec rec = residual_spec(64);
    rec.variant = Variant::recurrent;
    rec.leak = LeakSchedule::constant(1.0);
    ArchitectureSpec leak = rec;
    leak.variant = Variant::leak;

    const LeakResult a = propagate_recurrent(rec, init);
    const LeakResult b = propagate_with_leak(leak, init);

    SUBCASE("bit-identical to propagate_with_leak") {
        REQUIRE(a.trajectory.size() == b.trajectory.size());
        for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
            const auto& va = a.trajectory.profiles[k].values();
            const auto& vb = b.trajectory.profiles[k].values();
            CHECK(std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) == 0);
        }
    }

    SUBCASE("per-step side mass decays geometrically by (1 - eps)") {
        const double eps = rec.epsilon();
        const auto masses = a.side_masses();
        for (std::size_t k = 0; k + 1 < masses.size(); ++k)
            CHECK(masses[k + 1] == doctest::Approx(masses[k] * (1.0 - eps)).epsilon(1e-12));
    }

    SUBCASE("conservation") {
        CHECK(std::fabs(a.input_capacity.total_mass() + a.total_side_mass() - 1.0) <= 1e-12);
    }
}

TEST_CASE("2D residual propagation conserves mass and follows the variance law") {
    const Grid g = Grid::plane(33, 33);
    ArchitectureSpec spec = residual_spec(17);
    spec.variant = Variant::multidim;
    spec.generators = {StencilGenerator::symmetric_unit(2)};
    const CapacityProfile init = make_one_hot(g, g.center());
    const Trajectory traj = propagate_residual(spec, init);
    CHECK(std::fabs(traj.final_profile().total_mass() - 1.0) <= 1e-12);
    const ProfileStats stats = profile_stats(traj.final_profile());
    const double m2 = spec.generators[0].second_moment().xx +
                      spec.generators[0].second_moment().yy;
    CHECK(std::fabs(stats.std_width * stats.std_width - spec.epsilon() * m2 * spec.steps()) <
          1e-10);
}
