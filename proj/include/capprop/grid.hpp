#ifndef CAPPROP_GRID_HPP
#define CAPPROP_GRID_HPP

#include <array>
#include <stdexcept>
#include <string>

namespace capprop {

enum class Boundary { periodic, absorbing };

inline const char* to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "absorbing";
}

/// Regular lattice of unit spacing, 1- or 2-dimensional. Sites are indexed
/// 0..n-1 per axis and flattened row-major (x * ny + y).
struct Grid {
    int dim = 1;
    std::array<int, 2> extent{3, 1};
    Boundary boundary = Boundary::periodic;

    static Grid line(int n, Boundary b = Boundary::periodic) {
        if (n < 3) throw std::invalid_argument("grid.n: need at least 3 sites, got " + std::to_string(n));
        Grid g;
        g.dim = 1;
        g.extent = {n, 1};
        g.boundary = b;
        return g;
    }

    static Grid plane(int nx, int ny, Boundary b = Boundary::periodic) {
        if (nx < 3 || ny < 3)
            throw std::invalid_argument("grid.n: need at least 3 sites per axis, got " +
                                        std::to_string(nx) + "x" + std::to_string(ny));
        Grid g;
        g.dim = 2;
        g.extent = {nx, ny};
        g.boundary = b;
        return g;
    }

    int sites() const { return extent[0] * extent[1]; }

    int index(int x, int y = 0) const { return x * extent[1] + y; }

    /// Center site (flat index); one-hot defaults start here.
    int center() const { return index(extent[0] / 2, dim == 2 ? extent[1] / 2 : 0); }

    bool operator==(const Grid&) const = default;
};

} // namespace capprop

#endif
