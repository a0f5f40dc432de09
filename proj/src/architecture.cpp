#include "capprop/architecture.hpp"

#include <cmath>
#include <stdexcept>

namespace capprop {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::residual: return "residual";
        case Variant::skip_source: return "skip_source";
        case Variant::cumulative: return "cumulative";
        case Variant::leak: return "leak";
        case Variant::bias: return "bias";
        case Variant::dilated: return "dilated";
        case Variant::multichannel: return "multichannel";
        case Variant::multidim: return "multidim";
        case Variant::recurrent: return "recurrent";
    }
    return "?";
}

std::optional<Variant> variant_from_string(std::string_view s) {
    for (Variant v : {Variant::residual, Variant::skip_source, Variant::cumulative, Variant::leak,
                      Variant::bias, Variant::dilated, Variant::multichannel, Variant::multidim,
                      Variant::recurrent})
        if (s == to_string(v)) return v;
    return std::nullopt;
}

LeakSchedule LeakSchedule::constant(double a) {
    if (!(a >= 0.0) || !std::isfinite(a))
        throw std::invalid_argument("leak.alpha: must be finite and >= 0");
    LeakSchedule s;
    s.values_[0] = a;
    return s;
}

LeakSchedule LeakSchedule::piecewise(std::vector<double> starts, std::vector<double> values) {
    if (starts.empty() || starts.size() != values.size())
        throw std::invalid_argument("leak.starts: must be non-empty and match values");
    if (starts.front() != 0.0)
        throw std::invalid_argument("leak.starts: first interval must start at 0");
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (i > 0 && !(starts[i] > starts[i - 1]))
            throw std::invalid_argument("leak.starts: must be strictly increasing");
        if (!(starts[i] >= 0.0) || !(starts[i] < 1.0))
            throw std::invalid_argument("leak.starts: must lie in [0, 1)");
        if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
            throw std::invalid_argument("leak.values: must be finite and >= 0");
    }
    LeakSchedule s;
    s.starts_ = std::move(starts);
    s.values_ = std::move(values);
    return s;
}

double LeakSchedule::at(double t) const {
    std::size_t i = starts_.size() - 1;
    while (i > 0 && starts_[i] > t) --i;
    return values_[i];
}

double LeakSchedule::integral01() const {
    double total = 0.0;
    for (std::size_t i = 0; i < starts_.size(); ++i) {
        const double end = i + 1 < starts_.size() ? starts_[i + 1] : 1.0;
        total += values_[i] * (end - starts_[i]);
    }
    return total;
}

double LeakSchedule::max_value() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v);
    return m;
}

bool LeakSchedule::is_zero() const {
    for (double v : values_)
        if (v != 0.0) return false;
    return true;
}

double ArchitectureSpec::epsilon() const {
    double eps = capacity_rate * std::pow(static_cast<double>(steps()), -scaling_exponent);
    if (variant == Variant::multichannel) eps /= channels;
    return eps;
}

const StencilGenerator& ArchitectureSpec::generator_at(int step) const {
    if (generators.size() == 1) return generators.front();
    return generators[static_cast<std::size_t>(step)];
}

const StencilGenerator& ArchitectureSpec::block(int to_channel, int from_channel) const {
    return channel_blocks[static_cast<std::size_t>(to_channel) * channels + from_channel];
}

int ArchitectureSpec::dilation_at(int step) const {
    if (variant != Variant::dilated || dilation_ratio == 1.0) return 1;
    // Callers validate the grid fit first, so the rounded value is small;
    // clamp anyway so unvalidated specs cannot overflow.
    const double d = std::round(std::pow(dilation_ratio, step));
    return d < 1.0e9 ? static_cast<int>(d) : 1000000000;
}

int ArchitectureSpec::max_dilation() const {
    return dilation_at(steps() - 1); // the schedule is nondecreasing
}

void ArchitectureSpec::validate(const Grid& grid) const {
    if (depth < 2) throw std::invalid_argument("architecture.depth: must be >= 2");
    if (!(capacity_rate > 0.0) || !std::isfinite(capacity_rate))
        throw std::invalid_argument("architecture.capacity_rate: must be finite and > 0");
    if (!(scaling_exponent >= 0.0) || !std::isfinite(scaling_exponent))
        throw std::invalid_argument("architecture.scaling_exponent: must be finite and >= 0");
    if (channels < 1) throw std::invalid_argument("architecture.channels: must be >= 1");

    const double eps = epsilon();
    const double diag_rate = variant == Variant::multichannel ? eps * channels : eps;
    if (!(diag_rate > 0.0) || diag_rate > 1.0)
        throw std::invalid_argument(
            "architecture.capacity_rate: epsilon = " + std::to_string(eps) +
            " leaves operator entries outside [0, 1]; reduce capacity_rate or increase depth");

    if (variant == Variant::multichannel) {
        if (channel_blocks.size() != static_cast<std::size_t>(channels) * channels)
            throw std::invalid_argument("architecture.channel_blocks: need channels^2 generators");
        for (const auto& g : channel_blocks)
            if (g.dim() != grid.dim)
                throw std::invalid_argument("architecture.channel_blocks: generator dim must match grid");
    } else {
        if (generators.empty())
            throw std::invalid_argument("architecture.stencil: at least one generator required");
        if (generators.size() != 1 && generators.size() != static_cast<std::size_t>(steps()))
            throw std::invalid_argument("architecture.stencil: need one generator or one per step");
        for (const auto& g : generators)
            if (g.dim() != grid.dim)
                throw std::invalid_argument("architecture.stencil: generator dim must match grid");
    }

    if (variant == Variant::multidim) {
        if (grid.dim != 2) throw std::invalid_argument("grid.dim: multidim variant requires dim 2");
    } else if (grid.dim != 1) {
        throw std::invalid_argument("grid.dim: variant " + std::string(to_string(variant)) +
                                    " runs on 1D grids");
    }

    if (variant == Variant::dilated) {
        if (!(dilation_ratio >= 1.0))
            throw std::invalid_argument("architecture.dilation_ratio: must be >= 1");
        const double reach =
            2.0 * generators.front().radius() * static_cast<double>(max_dilation());
        if (reach >= grid.extent[0])
            throw std::invalid_argument(
                "grid.n: dilated reach " + std::to_string(static_cast<long long>(reach)) +
                " exceeds the grid; enlarge n or reduce depth/dilation_ratio");
    } else if (dilation_ratio != 1.0) {
        throw std::invalid_argument("architecture.dilation_ratio: only the dilated variant accepts it");
    }

    const bool leaky = variant == Variant::leak || variant == Variant::bias ||
                       variant == Variant::recurrent;
    if (leaky) {
        if (leak.max_value() * eps > 1.0)
            throw std::invalid_argument(
                "architecture.leak: alpha * epsilon exceeds 1; the survival factor would be negative");
    } else if (!leak.is_zero()) {
        throw std::invalid_argument("architecture.leak: only leak/bias/recurrent variants accept it");
    }
}

} // namespace capprop
