#ifndef CAPPROP_PROPAGATE_HPP
#define CAPPROP_PROPAGATE_HPP

#include <functional>
#include <optional>

#include "capprop/architecture.hpp"
#include "capprop/profile.hpp"

namespace capprop {

/// One layer's capacity operator (1-eps)*I + eps * sum_v delta_v * shift_{v*d}.
/// Column-stochastic on periodic grids, so mass is conserved exactly; on
/// absorbing grids mass crossing the boundary is dropped.
struct LayerOperator {
    const StencilGenerator* generator = nullptr;
    double epsilon = 0.0;
    int dilation = 1;
};

/// Validates 0 < epsilon <= 1 (the diagonal entry 1-eps must stay in [0,1]).
LayerOperator build_operator(const StencilGenerator& gen, double epsilon, int dilation = 1);

void apply_operator(const LayerOperator& op, const CapacityProfile& in, CapacityProfile& out);
CapacityProfile apply_operator(const LayerOperator& op, const CapacityProfile& in);

/// Spatial weight stencil whose elementwise square is the capacity operator:
/// |w_v| = sqrt(eps * delta_v) off-diagonal, |w_0| = sqrt(1 - eps), signs
/// drawn from rng. capacity_coefficients holds the exact squared magnitudes
/// (the operator coefficients), established at construction so the
/// weight/capacity duality is exact rather than subject to sqrt roundtrip
/// rounding.
struct WeightStencil {
    std::vector<Offset> offsets;               // first entry is {0,0}
    std::vector<double> weights;               // signed
    std::vector<double> capacity_coefficients; // weights squared, exact
};

WeightStencil weights_from_operator(const StencilGenerator& gen, double epsilon, const RngSpec& rng);

/// Capacity profiles indexed by reverse layer time t_k = k*dt. profiles[0]
/// is the supplied output capacity, profiles[steps] the input capacity.
struct Trajectory {
    std::vector<CapacityProfile> profiles;
    double dt = 1.0;
    std::optional<ArchitectureSpec> spec;

    const CapacityProfile& final_profile() const { return profiles.back(); }
    std::size_t size() const { return profiles.size(); }
};

/// Split produced by leaky propagation: the surviving stream, the per-step
/// capacities diverted to side inputs, and the input capacity pi(1).
/// mass(input) + sum mass(side) equals the supplied mass exactly.
struct LeakResult {
    Trajectory trajectory;
    std::vector<CapacityProfile> side_capacities;
    CapacityProfile input_capacity;

    std::vector<double> side_masses() const;
    double total_side_mass() const;
};

/// Capacity density injected at reverse layer time t (nonnegative).
using SourceFn = std::function<CapacityProfile(double t)>;

Trajectory propagate_residual(const ArchitectureSpec& spec, const CapacityProfile& kappa_L);

/// Starts from zero and accumulates dt * source(t_k) per step, in the
/// rescaled (per-layer) convention.
Trajectory propagate_with_source(const ArchitectureSpec& spec, const SourceFn& source);

LeakResult propagate_with_leak(const ArchitectureSpec& spec, const CapacityProfile& kappa_L);

Trajectory propagate_dilated(const ArchitectureSpec& spec, const CapacityProfile& kappa_L);

Trajectory propagate_multichannel(const ArchitectureSpec& spec, const CapacityProfile& kappa_L);

/// Identical stepping to propagate_with_leak with depth = sequence length;
/// side_capacities[k] is the capacity allocated to the input k steps before
/// the output.
LeakResult propagate_recurrent(const ArchitectureSpec& spec, const CapacityProfile& kappa_L);

/// Exact variance gained by a one-hot input under the spec's schedule,
/// eps * m2 * sum_j d_j^2 (valid pre-wraparound, symmetric generators).
double predicted_variance(const ArchitectureSpec& spec);

} // namespace capprop

#endif
