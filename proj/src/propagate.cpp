#include "capprop/propagate.hpp"

#include <cmath>
#include <stdexcept>

namespace capprop {

namespace {

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

/// out[x] += scale * sum_i delta_i * in[x + v_i * d], with the boundary rule
/// of the grid (periodic wrap, or dropped at absorbing edges). Mirror offsets
/// with equal rates are gathered as one addition, w * (in[x+v] + in[x-v]), so
/// a symmetric generator maps symmetric profiles to bitwise-symmetric ones.
void add_stencil_gather(const Grid& grid, const StencilGenerator& gen, int dilation, double scale,
                        std::span<const double> in, std::span<double> out) {
    const bool periodic = grid.boundary == Boundary::periodic;

    std::vector<std::pair<Offset, double>> pairs, singles;
    std::vector<bool> used(gen.size(), false);
    for (std::size_t i = 0; i < gen.size(); ++i) {
        if (used[i]) continue;
        const Offset v = gen.offsets()[i];
        const Offset mirror{-v.dx, -v.dy};
        bool paired = false;
        for (std::size_t j = i + 1; j < gen.size(); ++j) {
            if (!used[j] && gen.offsets()[j] == mirror && gen.rates()[j] == gen.rates()[i]) {
                used[i] = used[j] = true;
                pairs.emplace_back(v, scale * gen.rates()[i]);
                paired = true;
                break;
            }
        }
        if (!paired) singles.emplace_back(v, scale * gen.rates()[i]);
    }

    auto gather_1d = [&](Offset v, double w, bool both) {
        const int n = grid.extent[0];
        const int shift = v.dx * dilation;
        if (periodic) {
            for (int x = 0; x < n; ++x) {
                const double fwd = in[wrap(x + shift, n)];
                out[x] += both ? w * (fwd + in[wrap(x - shift, n)]) : w * fwd;
            }
        } else {
            for (int x = 0; x < n; ++x) {
                const int a = x + shift;
                const int b = x - shift;
                const double fwd = (a >= 0 && a < n) ? in[a] : 0.0;
                const double bwd = (both && b >= 0 && b < n) ? in[b] : 0.0;
                out[x] += both ? w * (fwd + bwd) : w * fwd;
            }
        }
    };

    auto gather_2d = [&](Offset v, double w, bool both) {
        const int nx = grid.extent[0];
        const int ny = grid.extent[1];
        const int sx = v.dx * dilation;
        const int sy = v.dy * dilation;
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                double fwd = 0.0, bwd = 0.0;
                if (periodic) {
                    fwd = in[wrap(x + sx, nx) * ny + wrap(y + sy, ny)];
                    if (both) bwd = in[wrap(x - sx, nx) * ny + wrap(y - sy, ny)];
                } else {
                    const int xa = x + sx, ya = y + sy;
                    if (xa >= 0 && xa < nx && ya >= 0 && ya < ny) fwd = in[xa * ny + ya];
                    if (both) {
                        const int xb = x - sx, yb = y - sy;
                        if (xb >= 0 && xb < nx && yb >= 0 && yb < ny) bwd = in[xb * ny + yb];
                    }
                }
                out[x * ny + y] += both ? w * (fwd + bwd) : w * fwd;
            }
    };

    for (const auto& [v, w] : pairs) grid.dim == 1 ? gather_1d(v, w, true) : gather_2d(v, w, true);
    for (const auto& [v, w] : singles)
        grid.dim == 1 ? gather_1d(v, w, false) : gather_2d(v, w, false);
}

void check_entry(const ArchitectureSpec& spec, const CapacityProfile& kappa_L,
                 std::initializer_list<Variant> allowed) {
    spec.validate(kappa_L.grid());
    bool ok = false;
    for (Variant v : allowed) ok = ok || spec.variant == v;
    if (!ok)
        throw std::invalid_argument(std::string("architecture.variant: ") + to_string(spec.variant) +
                                    " is not handled by this propagator");
    if (kappa_L.channels() != spec.channels)
        throw std::invalid_argument("profile.channels: must match architecture.channels");
}

/// Shared plain stepping (residual / multidim / dilated).
Trajectory run_plain(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    const double eps = spec.epsilon();
    Trajectory traj;
    traj.dt = spec.dt();
    traj.spec = spec;
    traj.profiles.reserve(spec.depth);
    traj.profiles.push_back(kappa_L);
    for (int k = 0; k < spec.steps(); ++k) {
        const LayerOperator op = build_operator(spec.generator_at(k), eps, spec.dilation_at(k));
        traj.profiles.push_back(apply_operator(op, traj.profiles.back()));
    }
    return traj;
}

LeakResult run_leaky(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    const double eps = spec.epsilon();
    const double dt = spec.dt();
    LeakResult result;
    result.trajectory.dt = dt;
    result.trajectory.spec = spec;
    result.trajectory.profiles.reserve(spec.depth);
    result.trajectory.profiles.push_back(kappa_L);
    result.side_capacities.reserve(spec.steps());
    for (int k = 0; k < spec.steps(); ++k) {
        const CapacityProfile& cur = result.trajectory.profiles.back();
        const double rate = spec.leak.at(k * dt) * eps;
        if (rate > 1.0)
            throw std::invalid_argument("architecture.leak: alpha * epsilon exceeds 1 at step " +
                                        std::to_string(k));
        CapacityProfile side(cur.grid(), cur.channels());
        for (std::size_t i = 0; i < cur.values().size(); ++i)
            side.values()[i] = rate * cur.values()[i];
        const LayerOperator op = build_operator(spec.generator_at(k), eps);
        CapacityProfile next = apply_operator(op, cur);
        const double keep = 1.0 - rate;
        for (double& v : next.values()) v *= keep;
        result.side_capacities.push_back(std::move(side));
        result.trajectory.profiles.push_back(std::move(next));
    }
    result.input_capacity = result.trajectory.profiles.back();
    return result;
}

} // namespace

LayerOperator build_operator(const StencilGenerator& gen, double epsilon, int dilation) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("operator.epsilon: must lie in (0, 1]");
    if (dilation < 1) throw std::invalid_argument("operator.dilation: must be >= 1");
    return LayerOperator{&gen, epsilon, dilation};
}

void apply_operator(const LayerOperator& op, const CapacityProfile& in, CapacityProfile& out) {
    if (!in.same_shape(out)) out = CapacityProfile(in.grid(), in.channels());
    const double keep = 1.0 - op.epsilon;
    for (int c = 0; c < in.channels(); ++c) {
        auto src = in.channel(c);
        auto dst = out.channel(c);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = keep * src[i];
        add_stencil_gather(in.grid(), *op.generator, op.dilation, op.epsilon, src, dst);
    }
}

CapacityProfile apply_operator(const LayerOperator& op, const CapacityProfile& in) {
    CapacityProfile out(in.grid(), in.channels());
    apply_operator(op, in, out);
    return out;
}

WeightStencil weights_from_operator(const StencilGenerator& gen, double epsilon, const RngSpec& rng) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("operator.epsilon: must lie in (0, 1]");
    Rng r(rng);
    WeightStencil w;
    w.offsets.reserve(gen.size() + 1);
    w.offsets.push_back({0, 0});
    w.capacity_coefficients.push_back(1.0 - epsilon);
    for (const Offset& v : gen.offsets()) w.offsets.push_back(v);
    for (double rate : gen.rates()) w.capacity_coefficients.push_back(epsilon * rate);
    w.weights.reserve(w.offsets.size());
    for (double coeff : w.capacity_coefficients) w.weights.push_back(r.sign() * std::sqrt(coeff));
    return w;
}

std::vector<double> LeakResult::side_masses() const {
    std::vector<double> masses;
    masses.reserve(side_capacities.size());
    for (const auto& p : side_capacities) masses.push_back(p.total_mass());
    return masses;
}

double LeakResult::total_side_mass() const {
    double total = 0.0;
    for (const auto& p : side_capacities) total += p.total_mass();
    return total;
}

Trajectory propagate_residual(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    check_entry(spec, kappa_L, {Variant::residual, Variant::multidim});
    return run_plain(spec, kappa_L);
}

Trajectory propagate_with_source(const ArchitectureSpec& spec, const SourceFn& source) {
    if (spec.variant != Variant::skip_source && spec.variant != Variant::cumulative)
        throw std::invalid_argument("architecture.variant: source propagation needs skip_source or cumulative");
    if (!source) throw std::invalid_argument("source: required for this variant");
    const double dt = spec.dt();
    const double eps = spec.epsilon();

    CapacityProfile s0 = source(0.0);
    spec.validate(s0.grid());
    if (s0.channels() != spec.channels)
        throw std::invalid_argument("source: channels must match architecture.channels");

    Trajectory traj;
    traj.dt = dt;
    traj.spec = spec;
    traj.profiles.reserve(spec.depth);
    traj.profiles.emplace_back(s0.grid(), s0.channels()); // pi(0, x) = 0
    for (int k = 0; k < spec.steps(); ++k) {
        const double t = k * dt;
        CapacityProfile inj = k == 0 ? std::move(s0) : source(t);
        if (!inj.same_shape(traj.profiles.front()))
            throw std::invalid_argument("source: density shape changed between steps");
        for (double v : inj.values())
            if (!(v >= 0.0)) throw std::invalid_argument("source: density must be >= 0");
        const LayerOperator op = build_operator(spec.generator_at(k), eps);
        CapacityProfile next = apply_operator(op, traj.profiles.back());
        for (std::size_t i = 0; i < next.values().size(); ++i)
            next.values()[i] += dt * inj.values()[i];
        traj.profiles.push_back(std::move(next));
    }
    return traj;
}

LeakResult propagate_with_leak(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    check_entry(spec, kappa_L, {Variant::leak, Variant::bias});
    return run_leaky(spec, kappa_L);
}

Trajectory propagate_dilated(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    check_entry(spec, kappa_L, {Variant::dilated});
    return run_plain(spec, kappa_L);
}

Trajectory propagate_multichannel(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    check_entry(spec, kappa_L, {Variant::multichannel});
    const double eps = spec.epsilon();
    const double keep = 1.0 - eps * spec.channels;
    const int C = spec.channels;

    Trajectory traj;
    traj.dt = spec.dt();
    traj.spec = spec;
    traj.profiles.reserve(spec.depth);
    traj.profiles.push_back(kappa_L);
    for (int k = 0; k < spec.steps(); ++k) {
        const CapacityProfile& cur = traj.profiles.back();
        CapacityProfile next(cur.grid(), C);
        for (int c = 0; c < C; ++c) {
            auto src = cur.channel(c);
            auto dst = next.channel(c);
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] = keep * src[i];
        }
        for (int c = 0; c < C; ++c) {
            auto dst = next.channel(c);
            for (int from = 0; from < C; ++from)
                add_stencil_gather(cur.grid(), spec.block(c, from), 1, eps, cur.channel(from), dst);
        }
        traj.profiles.push_back(std::move(next));
    }
    return traj;
}

LeakResult propagate_recurrent(const ArchitectureSpec& spec, const CapacityProfile& kappa_L) {
    check_entry(spec, kappa_L, {Variant::recurrent});
    return run_leaky(spec, kappa_L);
}

double predicted_variance(const ArchitectureSpec& spec) {
    const Moment2 m = spec.generators.front().second_moment();
    const double m2 = m.xx + m.yy;
    double sum_d2 = 0.0;
    for (int k = 0; k < spec.steps(); ++k) {
        const double d = spec.dilation_at(k);
        sum_d2 += d * d;
    }
    return spec.epsilon() * m2 * sum_d2;
}

} // namespace capprop
