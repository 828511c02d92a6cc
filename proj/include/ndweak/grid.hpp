// grid.hpp — uniform 1-D grid and trapezoid quadrature on it
#pragma once

#include <cstddef>
#include <vector>
#include <cmath>
#include <complex>

#include "ndweak/errors.hpp"

namespace ndweak {

struct Grid {
    double k0 = 0.0;   // first point
    double dk = 0.0;   // spacing, > 0
    std::size_t n = 0; // number of points, >= 2

    Grid() = default;
    Grid(double first, double spacing, std::size_t npoints)
        : k0(first), dk(spacing), n(npoints) {
        if (!(dk > 0.0) || n < 2) throw PhysicsError("Grid: need dk > 0 and n >= 2");
    }

    static Grid spanning(double lo, double hi, std::size_t npoints) {
        if (!(hi > lo)) throw PhysicsError("Grid::spanning: need hi > lo");
        if (npoints < 2) throw PhysicsError("Grid::spanning: need npoints >= 2");
        return Grid(lo, (hi - lo) / static_cast<double>(npoints - 1), npoints);
    }

    double operator[](std::size_t i) const { return k0 + dk * static_cast<double>(i); }
    double front() const { return k0; }
    double back() const { return (*this)[n - 1]; }

    std::vector<double> points() const {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = (*this)[i];
        return p;
    }

    bool contains(double k) const { return k >= front() - 1e-12 * dk && k <= back() + 1e-12 * dk; }
};

// Trapezoid rule over tabulated values on a uniform grid.
template <typename T>
T trapezoid(const Grid& g, const std::vector<T>& values) {
    if (values.size() != g.n) throw PhysicsError("trapezoid: value count does not match grid");
    T acc = T(0.5) * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < g.n; ++i) acc += values[i];
    return acc * g.dk;
}

template <typename F>
auto trapezoid_fn(const Grid& g, F&& f) -> decltype(f(0.0)) {
    using T = decltype(f(0.0));
    T acc = T(0.5) * (f(g.front()) + f(g.back()));
    for (std::size_t i = 1; i + 1 < g.n; ++i) acc += f(g[i]);
    return acc * g.dk;
}

} // namespace ndweak
