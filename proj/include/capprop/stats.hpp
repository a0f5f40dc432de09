#ifndef CAPPROP_STATS_HPP
#define CAPPROP_STATS_HPP

#include <utility>
#include <vector>

#include "capprop/profile.hpp"

namespace capprop {

/// Scalar diagnostics of a profile. On periodic grids moments are computed
/// on the minimal wrapped window (the complement of the longest run of empty
/// sites per axis); the window must fit in half the domain.
struct ProfileStats {
    double mass = 0.0;
    std::array<double, 2> centroid{0.0, 0.0}; // lattice units, per axis
    double std_width = 0.0;                   // sqrt of total variance about the centroid
};

/// Throws std::invalid_argument on zero mass or wrapped support wider than
/// half the domain. Multi-channel profiles are collapsed first.
ProfileStats profile_stats(const CapacityProfile& p);

/// Smallest centered width 2*r such that sites within distance r of the
/// centroid hold at least fraction q of the mass (Chebyshev distance in 2D).
double quantile_width(const CapacityProfile& p, double q);

enum class Norm { l1, l2, linf };

/// Discrete Lp distance over all sites and channels; shapes must match.
double lp_error(const CapacityProfile& a, const CapacityProfile& b, Norm norm);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r2 = 0.0;
};

/// Least-squares line through (log x, log y). Requires at least two distinct
/// positive x and positive y.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

} // namespace capprop

#endif
