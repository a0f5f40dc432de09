#include "capprop/diffusion.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace capprop {

namespace {

constexpr double kPi = 3.14159265358979323846;

double simpson01(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return acc * h / 3.0;
}

/// Periodic 1D Gaussian kernel of the given variance, sampled at sites,
/// images summed, renormalized to unit mass.
std::vector<double> periodic_gaussian_kernel(int n, double variance) {
    std::vector<double> k(static_cast<std::size_t>(n), 0.0);
    if (variance <= 0.0) {
        k[0] = 1.0;
        return k;
    }
    const double sigma = std::sqrt(variance);
    const int images = std::max(1, static_cast<int>(std::ceil(8.0 * sigma / n)) + 1);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const double base = j > n / 2 ? j - n : j;
        double v = 0.0;
        for (int m = -images; m <= images; ++m) {
            const double d = base + static_cast<double>(m) * n;
            v += std::exp(-d * d / (2.0 * variance));
        }
        k[j] = v;
        total += v;
    }
    for (double& v : k) v /= total;
    return k;
}

void convolve_periodic_1d(std::span<const double> kernel, std::span<const double> in,
                          std::span<double> out) {
    const int n = static_cast<int>(in.size());
    for (int x = 0; x < n; ++x) {
        double acc = 0.0;
        for (int y = 0; y < n; ++y) {
            int d = x - y;
            if (d < 0) d += n;
            acc += kernel[d] * in[y];
        }
        out[x] = acc;
    }
}

/// Convolve along one axis of a flattened 2D profile.
void convolve_axis(const Grid& grid, int axis, std::span<const double> kernel,
                   std::span<const double> in, std::span<double> out) {
    const int nx = grid.extent[0];
    const int ny = grid.extent[1];
    if (axis == 0) {
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                double acc = 0.0;
                for (int s = 0; s < nx; ++s) {
                    int d = x - s;
                    if (d < 0) d += nx;
                    acc += kernel[d] * in[s * ny + y];
                }
                out[x * ny + y] = acc;
            }
    } else {
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                double acc = 0.0;
                for (int s = 0; s < ny; ++s) {
                    int d = y - s;
                    if (d < 0) d += ny;
                    acc += kernel[d] * in[x * ny + s];
                }
                out[x * ny + y] = acc;
            }
    }
}

/// General 2D Gaussian kernel for covariance matrix [[sxx,sxy],[sxy,syy]].
std::vector<double> periodic_gaussian_kernel_2d(const Grid& grid, double sxx, double sxy,
                                                double syy) {
    const int nx = grid.extent[0];
    const int ny = grid.extent[1];
    const double det = sxx * syy - sxy * sxy;
    if (!(det > 0.0))
        throw std::invalid_argument("model.tensor: covariance must be positive definite");
    const double ixx = syy / det, iyy = sxx / det, ixy = -sxy / det;
    const int imx = std::max(1, static_cast<int>(std::ceil(8.0 * std::sqrt(sxx) / nx)) + 1);
    const int imy = std::max(1, static_cast<int>(std::ceil(8.0 * std::sqrt(syy) / ny)) + 1);
    std::vector<double> k(static_cast<std::size_t>(nx) * ny, 0.0);
    double total = 0.0;
    for (int jx = 0; jx < nx; ++jx) {
        const double bx = jx > nx / 2 ? jx - nx : jx;
        for (int jy = 0; jy < ny; ++jy) {
            const double by = jy > ny / 2 ? jy - ny : jy;
            double v = 0.0;
            for (int mx = -imx; mx <= imx; ++mx)
                for (int my = -imy; my <= imy; ++my) {
                    const double dx = bx + static_cast<double>(mx) * nx;
                    const double dy = by + static_cast<double>(my) * ny;
                    v += std::exp(-0.5 * (ixx * dx * dx + 2.0 * ixy * dx * dy + iyy * dy * dy));
                }
            k[jx * ny + jy] = v;
            total += v;
        }
    }
    for (double& v : k) v /= total;
    return k;
}

void convolve_periodic_2d(const Grid& grid, std::span<const double> kernel,
                          std::span<const double> in, std::span<double> out) {
    const int nx = grid.extent[0];
    const int ny = grid.extent[1];
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
            double acc = 0.0;
            for (int sx = 0; sx < nx; ++sx) {
                int dx = x - sx;
                if (dx < 0) dx += nx;
                for (int sy = 0; sy < ny; ++sy) {
                    int dy = y - sy;
                    if (dy < 0) dy += ny;
                    acc += kernel[dx * ny + dy] * in[sx * ny + sy];
                }
            }
            out[x * ny + y] = acc;
        }
}

} // namespace

DiffusionModel DiffusionModel::constant(double d, CapacityProfile init) {
    if (!(d >= 0.0) || !std::isfinite(d))
        throw std::invalid_argument("model.diffusivity: must be finite and >= 0");
    DiffusionModel m;
    m.dim = init.grid().dim;
    m.diffusivity = [d](double) { return d; };
    m.initial = std::move(init);
    return m;
}

DiffusionModel DiffusionModel::with_tensor(DiffusionTensor t, CapacityProfile init) {
    DiffusionModel m;
    m.dim = 2;
    m.tensor = t;
    m.use_tensor = true;
    m.initial = std::move(init);
    m.validate();
    return m;
}

double DiffusionModel::diffusivity_at(double t) const {
    if (!diffusivity) throw std::invalid_argument("model.diffusivity: not set");
    const double d = diffusivity(t);
    if (!(d >= 0.0) || !std::isfinite(d))
        throw std::invalid_argument("model.diffusivity: must be finite and >= 0 on [0, 1]");
    return d;
}

void DiffusionModel::validate() const {
    if (dim != initial.grid().dim)
        throw std::invalid_argument("model.dim: must match the initial profile's grid");
    if (use_tensor) {
        if (dim != 2) throw std::invalid_argument("model.tensor: only 2D models take a tensor");
        if (!(tensor.xx >= 0.0) || !(tensor.yy >= 0.0))
            throw std::invalid_argument("model.tensor: diagonal entries must be >= 0");
        if (tensor.xy != 0.0 && !(tensor.xy * tensor.xy < tensor.xx * tensor.yy))
            throw std::invalid_argument("model.tensor: requires |Dxy| < sqrt(Dxx*Dyy)");
    }
}

double integrated_diffusivity(const DiffusionModel& model, double t) {
    if (t == 0.0) return 0.0;
    return simpson01([&](double s) { return model.diffusivity_at(s); }, 0.0, t, 4096);
}

CapacityProfile heat_kernel_solution(const DiffusionModel& model, double t) {
    if (!(t >= 0.0) || t > 1.0)
        throw std::invalid_argument("heat_kernel.t: must lie in [0, 1]");
    if (!model.absorption.is_zero())
        throw std::invalid_argument("model.absorption: heat kernel solution requires alpha = 0");
    if (model.source)
        throw std::invalid_argument("model.source: heat kernel solution takes no source");
    if (model.initial.grid().boundary != Boundary::periodic)
        throw std::invalid_argument("model.grid: heat kernel solution requires a periodic grid");

    const Grid& grid = model.initial.grid();
    CapacityProfile out(grid, model.initial.channels());

    if (grid.dim == 1) {
        const double variance = 2.0 * integrated_diffusivity(model, t);
        if (variance == 0.0) return model.initial;
        const auto kernel = periodic_gaussian_kernel(grid.extent[0], variance);
        for (int c = 0; c < model.initial.channels(); ++c)
            convolve_periodic_1d(kernel, model.initial.channel(c), out.channel(c));
        return out;
    }

    DiffusionTensor tensor = model.tensor;
    if (!model.use_tensor) {
        const double v = integrated_diffusivity(model, t);
        tensor = DiffusionTensor{v / (t > 0 ? t : 1.0), 0.0, v / (t > 0 ? t : 1.0)};
    }
    const double sxx = 2.0 * t * tensor.xx;
    const double sxy = 2.0 * t * tensor.xy;
    const double syy = 2.0 * t * tensor.yy;
    if (sxx == 0.0 && syy == 0.0 && sxy == 0.0) return model.initial;

    if (sxy == 0.0) {
        const auto kx = periodic_gaussian_kernel(grid.extent[0], sxx);
        const auto ky = periodic_gaussian_kernel(grid.extent[1], syy);
        CapacityProfile tmp(grid, model.initial.channels());
        for (int c = 0; c < model.initial.channels(); ++c) {
            convolve_axis(grid, 0, kx, model.initial.channel(c), tmp.channel(c));
            convolve_axis(grid, 1, ky, tmp.channel(c), out.channel(c));
        }
        return out;
    }

    const auto kernel = periodic_gaussian_kernel_2d(grid, sxx, sxy, syy);
    for (int c = 0; c < model.initial.channels(); ++c)
        convolve_periodic_2d(grid, kernel, model.initial.channel(c), out.channel(c));
    return out;
}

Trajectory solve_pde(const DiffusionModel& model, int steps) {
    if (steps < 1) throw std::invalid_argument("solve_pde.steps: must be >= 1");
    model.validate();
    const Grid& grid = model.initial.grid();
    const bool periodic = grid.boundary == Boundary::periodic;
    const double dt = 1.0 / steps;

    // Stability scan of the explicit scheme over the whole time grid.
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        double dmax = 0.0;
        if (model.use_tensor)
            dmax = std::max(model.tensor.xx, model.tensor.yy);
        else
            dmax = model.diffusivity_at(t);
        if (dmax * dt > 0.5)
            throw std::invalid_argument("solve_pde.steps: explicit scheme unstable, D*dt = " +
                                        std::to_string(dmax * dt) + " > 0.5; increase steps");
        if (model.absorption.at(t) * dt > 1.0)
            throw std::invalid_argument("solve_pde.steps: alpha*dt = " +
                                        std::to_string(model.absorption.at(t) * dt) +
                                        " > 1; increase steps");
    }

    const int nx = grid.extent[0];
    const int ny = grid.extent[1];
    const int channels = model.initial.channels();

    Trajectory traj;
    traj.dt = dt;
    traj.profiles.reserve(static_cast<std::size_t>(steps) + 1);
    traj.profiles.push_back(model.initial);

    auto read = [&](std::span<const double> v, int x, int y) -> double {
        if (periodic) {
            x %= nx; if (x < 0) x += nx;
            y %= ny; if (y < 0) y += ny;
            return v[x * ny + y];
        }
        if (x < 0 || x >= nx || y < 0 || y >= ny) return 0.0;
        return v[x * ny + y];
    };

    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const double alpha = model.absorption.at(t);
        CapacityProfile src;
        if (model.source) {
            src = model.source(t);
            if (!src.same_shape(model.initial))
                throw std::invalid_argument("model.source: density shape must match the initial profile");
            for (double v : src.values())
                if (!(v >= 0.0)) throw std::invalid_argument("model.source: density must be >= 0");
        }
        const double d_scalar = model.use_tensor ? 0.0 : model.diffusivity_at(t);
        const CapacityProfile& cur = traj.profiles.back();
        CapacityProfile next(grid, channels);
        for (int c = 0; c < channels; ++c) {
            auto in = cur.channel(c);
            auto dst = next.channel(c);
            for (int x = 0; x < nx; ++x)
                for (int y = 0; y < ny; ++y) {
                    const double here = in[x * ny + y];
                    double rhs = -alpha * here;
                    if (model.use_tensor) {
                        const double lapx = read(in, x + 1, y) - 2.0 * here + read(in, x - 1, y);
                        const double lapy = read(in, x, y + 1) - 2.0 * here + read(in, x, y - 1);
                        const double mixed = 0.25 * (read(in, x + 1, y + 1) - read(in, x + 1, y - 1) -
                                                     read(in, x - 1, y + 1) + read(in, x - 1, y - 1));
                        rhs += model.tensor.xx * lapx + model.tensor.yy * lapy +
                               2.0 * model.tensor.xy * mixed;
                    } else {
                        double lap = read(in, x + 1, y) - 2.0 * here + read(in, x - 1, y);
                        if (grid.dim == 2)
                            lap += read(in, x, y + 1) - 2.0 * here + read(in, x, y - 1);
                        rhs += d_scalar * lap;
                    }
                    if (model.source) rhs += src.at(c, x * ny + y);
                    dst[x * ny + y] = here + dt * rhs;
                }
        }
        traj.profiles.push_back(std::move(next));
    }
    return traj;
}

CapacityProfile duhamel_solution(const DiffusionModel& model, double t, int steps) {
    if (!(t > 0.0) || t > 1.0) throw std::invalid_argument("duhamel.t: must lie in (0, 1]");
    if (steps < 1) throw std::invalid_argument("duhamel.steps: must be >= 1");
    if (model.dim != 1) throw std::invalid_argument("model.dim: duhamel solution is 1D");
    if (!model.absorption.is_zero())
        throw std::invalid_argument("model.absorption: duhamel solution requires alpha = 0");
    if (!model.source) throw std::invalid_argument("model.source: required");
    if (model.initial.grid().boundary != Boundary::periodic)
        throw std::invalid_argument("model.grid: duhamel solution requires a periodic grid");

    const Grid& grid = model.initial.grid();
    const int n = grid.extent[0];
    const double dt = t / steps;
    const double v_t = integrated_diffusivity(model, t);

    CapacityProfile out(grid, model.initial.channels());
    std::vector<double> conv(static_cast<std::size_t>(n));
    for (int j = 0; j < steps; ++j) {
        const double s_mid = (j + 0.5) * dt;
        const double tau = t - s_mid;
        const double w = 2.0 * (v_t - integrated_diffusivity(model, tau));
        CapacityProfile src = model.source(tau);
        if (!src.same_shape(model.initial))
            throw std::invalid_argument("model.source: density shape must match the initial profile");
        for (double v : src.values())
            if (!(v >= 0.0)) throw std::invalid_argument("model.source: density must be >= 0");
        const auto kernel = periodic_gaussian_kernel(n, w);
        for (int c = 0; c < src.channels(); ++c) {
            convolve_periodic_1d(kernel, src.channel(c), conv);
            auto dst = out.channel(c);
            for (int x = 0; x < n; ++x) dst[x] += dt * conv[x];
        }
    }
    return out;
}

double v_integral(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("v_integral.alpha: must be finite and >= 0");
    if (alpha == 0.0) return 1.0;
    return std::expm1(alpha) / alpha;
}

double v_integral(double lambda, int depth) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("v_integral.lambda: must be >= 1");
    if (depth < 2) throw std::invalid_argument("v_integral.depth: must be >= 2");
    if (lambda == 1.0) return 1.0;
    const double e = 2.0 * (depth - 1);
    return std::pow(lambda, e) / (e * std::log(lambda));
}

LeakSplit leak_split_analytic(const LeakSchedule& alpha, double diffusivity,
                              const CapacityProfile& kappa_L) {
    (void)diffusivity; // diffusion moves no mass; absorption is spatially uniform
    const double mass = kappa_L.total_mass();
    LeakSplit split;
    split.mass_x = std::exp(-alpha.integral01()) * mass;
    split.mass_y = mass - split.mass_x;
    return split;
}

CapacityProfile semigroup_solution(const StencilGenerator& gen, double rate, double t,
                                   const CapacityProfile& initial) {
    if (initial.grid().dim != 1 || gen.dim() != 1)
        throw std::invalid_argument("semigroup: 1D grids and generators only");
    if (initial.grid().boundary != Boundary::periodic)
        throw std::invalid_argument("semigroup: periodic grids only");
    if (!(rate >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("semigroup: rate and t must be >= 0");

    const int n = initial.grid().extent[0];
    std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double phase = -2.0 * kPi * k / n;
        twiddle[k] = {std::cos(phase), std::sin(phase)};
    }

    // Frequency multipliers exp(-rate * t * g_j), g_j = sum_v delta_v (1 - e^{i v xi_j}).
    std::vector<std::complex<double>> mult(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        std::complex<double> g = 0.0;
        for (std::size_t i = 0; i < gen.size(); ++i) {
            const int v = gen.offsets()[i].dx;
            const double xi = 2.0 * kPi * j * v / n;
            g += gen.rates()[i] * (std::complex<double>(1.0, 0.0) -
                                   std::complex<double>(std::cos(xi), std::sin(xi)));
        }
        mult[j] = std::exp(-rate * t * g);
    }

    CapacityProfile out(initial.grid(), initial.channels());
    std::vector<std::complex<double>> freq(static_cast<std::size_t>(n));
    for (int c = 0; c < initial.channels(); ++c) {
        auto in = initial.channel(c);
        for (int j = 0; j < n; ++j) {
            std::complex<double> acc = 0.0;
            for (int x = 0; x < n; ++x) acc += in[x] * twiddle[static_cast<std::size_t>(j) * x % n];
            freq[j] = acc * mult[j];
        }
        auto dst = out.channel(c);
        for (int x = 0; x < n; ++x) {
            std::complex<double> acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += freq[j] * std::conj(twiddle[static_cast<std::size_t>(j) * x % n]);
            dst[x] = std::max(0.0, acc.real() / n);
        }
    }
    return out;
}

} // namespace capprop
