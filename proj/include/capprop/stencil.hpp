#ifndef CAPPROP_STENCIL_HPP
#define CAPPROP_STENCIL_HPP

#include <span>
#include <vector>

#include "capprop/rng.hpp"

namespace capprop {

/// Integer lattice offset; dy is 0 for 1-dimensional stencils.
struct Offset {
    int dx = 0;
    int dy = 0;
    bool operator==(const Offset&) const = default;
};

/// Second spatial moment matrix M_ij = sum_v v_i v_j delta_v (symmetric PSD).
struct Moment2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    /// 1D scalar second moment.
    double scalar() const { return xx; }
};

/// Spatial redistribution rates of one capacity layer: nonzero offsets v with
/// rates delta_v >= 0, normalized at construction so sum_v delta_v = 1. The
/// diagonal is implied (-sum delta_v), so one knob epsilon carries the whole
/// per-layer scale.
class StencilGenerator {
public:
    StencilGenerator(int dim, std::vector<Offset> offsets, std::vector<double> rates);

    /// Nearest-neighbour symmetric generator: 1D {+1,-1} at 1/2 each,
    /// 2D 4-neighbour at 1/4 each.
    static StencilGenerator symmetric_unit(int dim);

    int dim() const { return dim_; }
    std::span<const Offset> offsets() const { return offsets_; }
    std::span<const double> rates() const { return rates_; }
    std::size_t size() const { return offsets_.size(); }

    /// Largest |offset| component over both axes.
    int radius() const { return radius_; }

    Moment2 second_moment() const;

    /// First moment (drift) per axis; zero for symmetric generators.
    std::array<double, 2> first_moment() const;

    bool is_symmetric() const;

    bool operator==(const StencilGenerator&) const = default;

private:
    int dim_ = 1;
    int radius_ = 0;
    std::vector<Offset> offsets_;
    std::vector<double> rates_;
};

/// Rates drawn i.i.d. uniform on (0,1] for every nonzero offset within the
/// given radius, then normalized. Deterministic for a given seed.
StencilGenerator random_generator(const RngSpec& rng, int radius, int dim);

/// As random_generator but with delta_v = delta_{-v} enforced (rates drawn
/// for one half-space and mirrored), so the exact variance law applies.
StencilGenerator random_symmetric_generator(const RngSpec& rng, int radius, int dim);

} // namespace capprop

#endif
