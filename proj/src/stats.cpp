#include "capprop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capprop {

namespace {

/// Marginal mass along one axis, summed over channels and the other axis.
std::vector<double> axis_marginal(const CapacityProfile& p, int axis) {
    const int nx = p.grid().extent[0];
    const int ny = p.grid().extent[1];
    const int n = p.grid().extent[axis];
    std::vector<double> m(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < p.channels(); ++c) {
        auto v = p.channel(c);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) m[axis == 0 ? x : y] += v[x * ny + y];
    }
    return m;
}

struct AxisMoments {
    double centroid = 0.0; // mapped into [0, n)
    double variance = 0.0;
};

/// Periodic moments are taken over the full circle unwrapped around the peak
/// site, so no tail mass is truncated. The cut opposite the peak must carry
/// only negligible mass (<= 1e-12 of the peak), otherwise the window choice
/// would move the centroid and the profile is rejected as ambiguous.
AxisMoments axis_moments(const std::vector<double>& m, bool periodic, double mass) {
    const int n = static_cast<int>(m.size());
    int start = 0;
    if (periodic) {
        int peak_idx = 0;
        for (int i = 1; i < n; ++i)
            if (m[i] > m[peak_idx]) peak_idx = i;
        start = peak_idx - n / 2;
        const double cutoff = 1e-12 * m[peak_idx];
        const int lo = ((start % n) + n) % n;
        const int hi = ((start + n - 1) % n + n) % n;
        if (m[lo] > cutoff || m[hi] > cutoff)
            throw std::invalid_argument(
                "profile: support wraps around the grid; the centroid is ambiguous");
    }
    double first = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = start + k; // unwrapped coordinate
        first += m[((start + k) % n + n) % n] * x;
    }
    const double centroid = first / mass;
    double second = 0.0;
    for (int k = 0; k < n; ++k) {
        const double d = start + k - centroid;
        second += m[((start + k) % n + n) % n] * d * d;
    }
    AxisMoments out;
    out.centroid = periodic ? std::fmod(centroid, static_cast<double>(n)) : centroid;
    if (out.centroid < 0.0) out.centroid += n;
    out.variance = second / mass;
    return out;
}

} // namespace

ProfileStats profile_stats(const CapacityProfile& p) {
    const double mass = p.total_mass();
    if (!(mass > 0.0)) throw std::invalid_argument("profile: zero mass has no stats");
    const bool periodic = p.grid().boundary == Boundary::periodic;

    ProfileStats stats;
    stats.mass = mass;
    double variance = 0.0;
    for (int axis = 0; axis < p.grid().dim; ++axis) {
        const auto m = axis_marginal(p, axis);
        const AxisMoments am = axis_moments(m, periodic, mass);
        stats.centroid[axis] = am.centroid;
        variance += am.variance;
    }
    stats.std_width = std::sqrt(variance);
    return stats;
}

double quantile_width(const CapacityProfile& p, double q) {
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("quantile.q: must lie in (0, 1]");
    const ProfileStats stats = profile_stats(p);
    const int nx = p.grid().extent[0];
    const int ny = p.grid().extent[1];
    const bool periodic = p.grid().boundary == Boundary::periodic;

    auto axis_dist = [&](double x, double c, int n) {
        double d = std::fabs(x - c);
        if (periodic) d = std::min(d, n - d);
        return d;
    };

    std::vector<std::pair<double, double>> by_dist; // (chebyshev distance, mass)
    by_dist.reserve(static_cast<std::size_t>(p.sites()));
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
            double site_mass = 0.0;
            for (int c = 0; c < p.channels(); ++c) site_mass += p.at(c, x * ny + y);
            if (site_mass == 0.0) continue;
            double d = axis_dist(x, stats.centroid[0], nx);
            if (p.grid().dim == 2) d = std::max(d, axis_dist(y, stats.centroid[1], ny));
            by_dist.emplace_back(d, site_mass);
        }
    std::sort(by_dist.begin(), by_dist.end());
    const double target = q * stats.mass;
    double cum = 0.0;
    for (const auto& [d, m] : by_dist) {
        cum += m;
        if (cum >= target * (1.0 - 1e-12)) return 2.0 * d;
    }
    return 2.0 * by_dist.back().first;
}

double lp_error(const CapacityProfile& a, const CapacityProfile& b, Norm norm) {
    if (!a.same_shape(b))
        throw std::invalid_argument("lp_error: profiles must share grid and channel count");
    double acc = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = std::fabs(va[i] - vb[i]);
        switch (norm) {
            case Norm::l1: acc += d; break;
            case Norm::l2: acc += d * d; break;
            case Norm::linf: acc = std::max(acc, d); break;
        }
    }
    return norm == Norm::l2 ? std::sqrt(acc) : acc;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("fit: need at least 2 points");
    std::vector<double> lx, ly;
    lx.reserve(points.size());
    ly.reserve(points.size());
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw std::invalid_argument("fit: points must be finite and positive");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit: need at least 2 distinct x values");

    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(my - fit.exponent * mx);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double pred = my + fit.exponent * (lx[i] - mx);
        ss_res += (ly[i] - pred) * (ly[i] - pred);
        ss_tot += (ly[i] - my) * (ly[i] - my);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

} // namespace capprop
