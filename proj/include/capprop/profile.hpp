#ifndef CAPPROP_PROFILE_HPP
#define CAPPROP_PROFILE_HPP

#include <span>
#include <vector>

#include "capprop/grid.hpp"

namespace capprop {

/// Nonnegative capacity mass per lattice site, optionally per channel.
/// Storage is channel-major: values[c * sites + site].
class CapacityProfile {
public:
    CapacityProfile() = default;

    /// All-zero profile.
    explicit CapacityProfile(Grid grid, int channels = 1);

    /// Takes ownership of values; validates shape, nonnegativity and finiteness.
    CapacityProfile(Grid grid, int channels, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    int channels() const { return channels_; }
    int sites() const { return grid_.sites(); }

    double at(int channel, int site) const { return values_[channel * grid_.sites() + site]; }
    double& at(int channel, int site) { return values_[channel * grid_.sites() + site]; }

    std::span<const double> channel(int c) const {
        return {values_.data() + c * grid_.sites(), static_cast<std::size_t>(grid_.sites())};
    }
    std::span<double> channel(int c) {
        return {values_.data() + c * grid_.sites(), static_cast<std::size_t>(grid_.sites())};
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double total_mass() const;
    double channel_mass(int c) const;

    bool same_shape(const CapacityProfile& other) const {
        return grid_ == other.grid_ && channels_ == other.channels_;
    }

private:
    Grid grid_{};
    int channels_ = 1;
    std::vector<double> values_;
};

/// Unit mass at a single (channel, site); Dirac output capacity.
CapacityProfile make_one_hot(const Grid& grid, int site, int channel = 0, int channels = 1);

/// Sitewise sum over channels; mass preserved exactly.
CapacityProfile collapse_channels(const CapacityProfile& p);

} // namespace capprop

#endif
