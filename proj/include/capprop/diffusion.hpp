#ifndef CAPPROP_DIFFUSION_HPP
#define CAPPROP_DIFFUSION_HPP

#include "capprop/propagate.hpp"

namespace capprop {

/// Constant symmetric positive semidefinite diffusion tensor for 2D models.
struct DiffusionTensor {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

/// Continuum counterpart of an architecture: dpi/dt = D d2pi/dx2
/// - alpha(t) pi + s(t, x) on t in [0, 1].
struct DiffusionModel {
    int dim = 1;
    std::function<double(double)> diffusivity; // scalar D(t) >= 0
    DiffusionTensor tensor;                    // used when dim == 2 and use_tensor
    bool use_tensor = false;
    LeakSchedule absorption;
    SourceFn source; // may be empty
    CapacityProfile initial;

    static DiffusionModel constant(double d, CapacityProfile init);
    static DiffusionModel with_tensor(DiffusionTensor t, CapacityProfile init);

    double diffusivity_at(double t) const;
    void validate() const;
};

/// V(t) = integral of D(s) ds on [0, t]. Exact for constant D, composite
/// Simpson (4096 panels) otherwise.
double integrated_diffusivity(const DiffusionModel& model, double t);

/// Convolution of the initial profile with the Gaussian kernel of variance
/// 2 V(t), sampled at lattice sites, periodic images summed, renormalized to
/// unit mass. Requires alpha = 0 and no source.
CapacityProfile heat_kernel_solution(const DiffusionModel& model, double t);

/// Forward-Euler centered-difference trajectory on the model's lattice.
/// Rejects steps violating the stability bound D*dt <= 1/2 per axis.
Trajectory solve_pde(const DiffusionModel& model, int steps);

/// Integral-form solution with a source: midpoint quadrature of heat kernels
/// against the source on the same time grid solve_pde uses. Requires
/// alpha = 0, scalar D, dim 1.
CapacityProfile duhamel_solution(const DiffusionModel& model, double t, int steps);

/// V(1) for exponentially growing diffusivity D(t) = e^{alpha(1-t)}:
/// (e^alpha - 1)/alpha, continuous at alpha -> 0.
double v_integral(double alpha);

/// V(1) for per-layer dilation ratio lambda at depth L (large-depth closed
/// form lambda^{2L-2} / ((2L-2) log lambda); lambda = 1 degenerates to unit
/// diffusivity).
double v_integral(double lambda, int depth);

struct LeakSplit {
    double mass_x = 0.0;
    double mass_y = 0.0;
};

/// Mass split of leaky diffusion: mass_x = e^{-int alpha} * mass(kappa_L).
/// Diffusion moves no mass, so the diffusivity does not enter.
LeakSplit leak_split_analytic(const LeakSchedule& alpha, double diffusivity,
                              const CapacityProfile& kappa_L);

/// Exact-in-time solution of the lattice diffusion equation
/// dpi/dt = rate * (sum_v delta_v shift_v - I) pi at time t, computed
/// spectrally (DFT). This is the refinement limit of both the layer recursion
/// and solve_pde on the same stencil; 1D periodic grids only.
CapacityProfile semigroup_solution(const StencilGenerator& gen, double rate, double t,
                                   const CapacityProfile& initial);

} // namespace capprop

#endif
