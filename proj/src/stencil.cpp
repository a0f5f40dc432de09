#include "capprop/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace capprop {

StencilGenerator::StencilGenerator(int dim, std::vector<Offset> offsets, std::vector<double> rates)
    : dim_(dim), offsets_(std::move(offsets)), rates_(std::move(rates)) {
    if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("stencil.dim: must be 1 or 2");
    if (offsets_.empty()) throw std::invalid_argument("stencil.offsets: must be non-empty");
    if (offsets_.size() != rates_.size())
        throw std::invalid_argument("stencil.rates: size must match offsets");
    double total = 0.0;
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
        const Offset& v = offsets_[i];
        if (v.dx == 0 && v.dy == 0)
            throw std::invalid_argument("stencil.offsets: offset 0 is implied and must be excluded");
        if (dim_ == 1 && v.dy != 0)
            throw std::invalid_argument("stencil.offsets: dy must be 0 for 1D stencils");
        for (std::size_t j = 0; j < i; ++j)
            if (offsets_[j] == v) throw std::invalid_argument("stencil.offsets: duplicate offset");
        if (!(rates_[i] >= 0.0) || !std::isfinite(rates_[i]))
            throw std::invalid_argument("stencil.rates: rates must be finite and >= 0");
        total += rates_[i];
        radius_ = std::max({radius_, std::abs(v.dx), std::abs(v.dy)});
    }
    if (!(total > 0.0))
        throw std::invalid_argument("stencil.rates: total rate must be positive");
    for (double& r : rates_) r /= total;
}

StencilGenerator StencilGenerator::symmetric_unit(int dim) {
    if (dim == 1)
        return StencilGenerator(1, {{1, 0}, {-1, 0}}, {0.5, 0.5});
    return StencilGenerator(2, {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {0.25, 0.25, 0.25, 0.25});
}

Moment2 StencilGenerator::second_moment() const {
    Moment2 m;
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
        const double r = rates_[i];
        m.xx += r * offsets_[i].dx * offsets_[i].dx;
        m.xy += r * offsets_[i].dx * offsets_[i].dy;
        m.yy += r * offsets_[i].dy * offsets_[i].dy;
    }
    return m;
}

std::array<double, 2> StencilGenerator::first_moment() const {
    std::array<double, 2> m{0.0, 0.0};
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
        m[0] += rates_[i] * offsets_[i].dx;
        m[1] += rates_[i] * offsets_[i].dy;
    }
    return m;
}

bool StencilGenerator::is_symmetric() const {
    for (std::size_t i = 0; i < offsets_.size(); ++i) {
        const Offset mirror{-offsets_[i].dx, -offsets_[i].dy};
        auto it = std::find(offsets_.begin(), offsets_.end(), mirror);
        if (it == offsets_.end()) return false;
        if (rates_[static_cast<std::size_t>(it - offsets_.begin())] != rates_[i]) return false;
    }
    return true;
}

namespace {

std::vector<Offset> offsets_within(int radius, int dim) {
    std::vector<Offset> out;
    const int ry = dim == 2 ? radius : 0;
    for (int dx = -radius; dx <= radius; ++dx)
        for (int dy = -ry; dy <= ry; ++dy)
            if (dx != 0 || dy != 0) out.push_back({dx, dy});
    return out;
}

} // namespace

StencilGenerator random_generator(const RngSpec& rng, int radius, int dim) {
    if (radius < 1) throw std::invalid_argument("stencil.radius: must be >= 1");
    auto offsets = offsets_within(radius, dim);
    Rng r(rng);
    std::vector<double> rates(offsets.size());
    for (double& x : rates) x = r.uniform_open01();
    return StencilGenerator(dim, std::move(offsets), std::move(rates));
}

StencilGenerator random_symmetric_generator(const RngSpec& rng, int radius, int dim) {
    if (radius < 1) throw std::invalid_argument("stencil.radius: must be >= 1");
    auto offsets = offsets_within(radius, dim);
    Rng r(rng);
    std::vector<double> rates(offsets.size(), 0.0);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const Offset& v = offsets[i];
        if (v.dx > 0 || (v.dx == 0 && v.dy > 0)) {
            const double x = r.uniform_open01();
            rates[i] = x;
            const Offset mirror{-v.dx, -v.dy};
            auto it = std::find(offsets.begin(), offsets.end(), mirror);
            rates[static_cast<std::size_t>(it - offsets.begin())] = x;
        }
    }
    return StencilGenerator(dim, std::move(offsets), std::move(rates));
}

} // namespace capprop
