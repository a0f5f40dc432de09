#ifndef CAPPROP_ARCHITECTURE_HPP
#define CAPPROP_ARCHITECTURE_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "capprop/grid.hpp"
#include "capprop/stencil.hpp"

namespace capprop {

enum class Variant {
    residual,
    skip_source,
    cumulative,
    leak,
    bias,
    dilated,
    multichannel,
    multidim,
    recurrent,
};

const char* to_string(Variant v);
std::optional<Variant> variant_from_string(std::string_view s);

/// Piecewise-constant nonnegative rate on [0, 1], closed on the left.
class LeakSchedule {
public:
    LeakSchedule() : starts_{0.0}, values_{0.0} {}

    static LeakSchedule constant(double a);

    /// starts must begin at 0 and be strictly increasing within [0, 1);
    /// values are the rates on [starts[i], starts[i+1]).
    static LeakSchedule piecewise(std::vector<double> starts, std::vector<double> values);

    double at(double t) const;
    double integral01() const;
    double max_value() const;
    bool is_zero() const;

    std::span<const double> starts() const { return starts_; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> starts_;
    std::vector<double> values_;
};

/// One architecture to simulate: which propagation variant, its depth and
/// scaling knobs, and the per-layer stencils. Reverse layer time runs over
/// t_k = k/(depth-1); epsilon = capacity_rate * (depth-1)^(-scaling_exponent),
/// divided by the channel count for the multichannel variant.
struct ArchitectureSpec {
    Variant variant = Variant::residual;
    int depth = 2;                   // L; sequence length N for recurrent
    double capacity_rate = 1.0;      // c
    double scaling_exponent = 1.0;   // p
    std::vector<StencilGenerator> generators;     // one shared, or one per step
    std::vector<StencilGenerator> channel_blocks; // C*C row-major (to-channel, from-channel)
    LeakSchedule leak;
    double dilation_ratio = 1.0;     // lambda
    int channels = 1;

    int steps() const { return depth - 1; }
    double dt() const { return 1.0 / steps(); }
    double epsilon() const;

    const StencilGenerator& generator_at(int step) const;
    const StencilGenerator& block(int to_channel, int from_channel) const;

    /// Dilation of step k (0-based): round(lambda^k). Grows along the sweep
    /// so the final step carries the largest receptive field.
    int dilation_at(int step) const;
    int max_dilation() const;

    /// Throws std::invalid_argument naming the offending field.
    void validate(const Grid& grid) const;
};

} // namespace capprop

#endif
