#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "pde.hpp"

namespace beacons {

enum class Boundary { outflow, periodic };

struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n{4, 1};
    int ghost = 2;
    std::array<Boundary, 2> bc{Boundary::outflow, Boundary::outflow};

    static GridSpec line(double lo, double hi, int n, Boundary bc = Boundary::outflow) {
        GridSpec g;
        g.dim = 1;
        g.lo = {lo, 0.0};
        g.hi = {hi, 1.0};
        g.n = {n, 1};
        g.bc = {bc, bc};
        return g;
    }
    static GridSpec square(double lo, double hi, int n, Boundary bc = Boundary::outflow) {
        GridSpec g;
        g.dim = 2;
        g.lo = {lo, lo};
        g.hi = {hi, hi};
        g.n = {n, n};
        g.bc = {bc, bc};
        return g;
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
        for (int k = 0; k < dim; ++k) {
            if (!(hi[k] > lo[k])) throw std::invalid_argument("grid: upper bound must exceed lower");
            if (n[k] < 4) throw std::invalid_argument("grid: need at least 4 cells per axis");
        }
        if (ghost < 1) throw std::invalid_argument("grid: ghost width must be >= 1");
    }

    double dx(int k) const { return (hi[k] - lo[k]) / n[k]; }
    double center(int k, int i) const { return lo[k] + (i + 0.5) * dx(k); }
    double cell_volume() const { return dim == 1 ? dx(0) : dx(0) * dx(1); }
    double volume() const { return dim == 1 ? hi[0] - lo[0] : (hi[0] - lo[0]) * (hi[1] - lo[1]); }
    int cells() const { return dim == 1 ? n[0] : n[0] * n[1]; }
    int stride_x() const { return n[0] + 2 * ghost; }
    int rows_total() const { return dim == 1 ? 1 : n[1] + 2 * ghost; }

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && lo == o.lo && hi == o.hi && n == o.n && ghost == o.ghost && bc == o.bc;
    }
};

// Interior cells plus ghost layers; i, j are interior indices (ghosts are
// negative or >= n).
struct StateField {
    GridSpec grid;
    int m = 1;
    std::vector<State> cells;

    StateField() = default;
    StateField(const GridSpec& g, int m_) : grid(g), m(m_) {
        grid.validate();
        cells.assign(static_cast<size_t>(g.stride_x()) * g.rows_total(), State{});
    }

    size_t index(int i, int j = 0) const {
        int row = grid.dim == 1 ? 0 : j + grid.ghost;
        return static_cast<size_t>(row) * grid.stride_x() + (i + grid.ghost);
    }
    State& at(int i, int j = 0) { return cells[index(i, j)]; }
    const State& at(int i, int j = 0) const { return cells[index(i, j)]; }

    int nx() const { return grid.n[0]; }
    int ny() const { return grid.dim == 1 ? 1 : grid.n[1]; }

    template <class Fn> void for_interior(Fn&& fn) const {
        for (int j = 0; j < ny(); ++j)
            for (int i = 0; i < nx(); ++i) fn(i, j, at(i, j));
    }

    // Cell-volume-weighted totals per component, fixed summation order.
    State totals() const {
        State s{};
        for_interior([&](int, int, const State& u) {
            for (int c = 0; c < m; ++c) s[c] += u[c];
        });
        for (int c = 0; c < m; ++c) s[c] *= grid.cell_volume();
        return s;
    }

    bool same_interior(const StateField& o) const {
        if (!(grid == o.grid) || m != o.m) return false;
        bool eq = true;
        for_interior([&](int i, int j, const State& u) {
            for (int c = 0; c < m; ++c)
                if (u[c] != o.at(i, j)[c]) eq = false;
        });
        return eq;
    }
};

}  // namespace beacons
