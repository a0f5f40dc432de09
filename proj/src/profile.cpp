#include "capprop/profile.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace capprop {

CapacityProfile::CapacityProfile(Grid grid, int channels)
    : grid_(grid), channels_(channels) {
    if (channels < 1) throw std::invalid_argument("profile.channels: must be >= 1");
    values_.assign(static_cast<std::size_t>(channels) * grid_.sites(), 0.0);
}

CapacityProfile::CapacityProfile(Grid grid, int channels, std::vector<double> values)
    : grid_(grid), channels_(channels), values_(std::move(values)) {
    if (channels < 1) throw std::invalid_argument("profile.channels: must be >= 1");
    if (values_.size() != static_cast<std::size_t>(channels) * grid_.sites())
        throw std::invalid_argument("profile.values: size does not match grid x channels");
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("profile.values: entries must be finite and >= 0");
    }
}

double CapacityProfile::total_mass() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double CapacityProfile::channel_mass(int c) const {
    auto s = channel(c);
    return std::accumulate(s.begin(), s.end(), 0.0);
}

CapacityProfile make_one_hot(const Grid& grid, int site, int channel, int channels) {
    if (site < 0 || site >= grid.sites())
        throw std::invalid_argument("one_hot.site: out of range");
    if (channel < 0 || channel >= channels)
        throw std::invalid_argument("one_hot.channel: out of range");
    CapacityProfile p(grid, channels);
    p.at(channel, site) = 1.0;
    return p;
}

CapacityProfile collapse_channels(const CapacityProfile& p) {
    if (p.channels() == 1) return p;
    CapacityProfile out(p.grid(), 1);
    auto dst = out.channel(0);
    for (int c = 0; c < p.channels(); ++c) {
        auto src = p.channel(c);
        for (int i = 0; i < p.sites(); ++i) dst[i] += src[i];
    }
    return out;
}

} // namespace capprop
