// Piecewise-analytic initial data: breakpoints plus catalog forms per piece.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pde.hpp"

namespace beacons {

constexpr int kSmoothInf = std::numeric_limits<int>::max();
constexpr int kOrderCap = 8;

inline int cap_order(int n) { return std::min(n, kOrderCap); }

struct Form {
    enum class Kind { constant, affine, sines, gaussian, custom };
    struct Sine {
        double amp, freq, phase;
    };
    Kind kind = Kind::constant;
    double c0 = 0.0;     // constant value, affine intercept, or offset
    double slope = 0.0;  // affine slope
    std::vector<Sine> sines;
    double amp = 0.0, center = 0.0, width = 1.0;  // gaussian
    std::function<double(double, int)> custom;   // k-th derivative at x

    static Form constant(double v) {
        Form f;
        f.c0 = v;
        return f;
    }
    static Form affine(double c0, double slope) {
        Form f;
        f.kind = Kind::affine;
        f.c0 = c0;
        f.slope = slope;
        return f;
    }
    static Form sum_of_sines(std::vector<Sine> terms, double offset = 0.0) {
        if (terms.size() > 3) throw std::invalid_argument("at most 3 sine terms");
        Form f;
        f.kind = Kind::sines;
        f.sines = std::move(terms);
        f.c0 = offset;
        return f;
    }
    static Form gaussian(double amp, double center, double width, double offset = 0.0) {
        if (!(width > 0)) throw std::invalid_argument("gaussian width must be positive");
        Form f;
        f.kind = Kind::gaussian;
        f.amp = amp;
        f.center = center;
        f.width = width;
        f.c0 = offset;
        return f;
    }
    static Form function(std::function<double(double, int)> fn) {
        Form f;
        f.kind = Kind::custom;
        f.custom = std::move(fn);
        return f;
    }

    // k-th derivative.
    double d(double x, int k = 0) const {
        switch (kind) {
        case Kind::constant: return k == 0 ? c0 : 0.0;
        case Kind::affine: return k == 0 ? c0 + slope * x : (k == 1 ? slope : 0.0);
        case Kind::sines: {
            double s = k == 0 ? c0 : 0.0;
            for (auto& t : sines)
                s += t.amp * std::pow(t.freq, k) * std::sin(t.freq * x + t.phase + k * std::numbers::pi / 2);
            return s;
        }
        case Kind::gaussian: {
            // d^k/dx^k exp(-s^2/2) = (-1)^k He_k(s) exp(-s^2/2) / w^k
            double s = (x - center) / width;
            double h0 = 1.0, h1 = s, hk = k == 0 ? 1.0 : s;
            for (int j = 2; j <= k; ++j) {
                hk = s * h1 - (j - 1) * h0;
                h0 = h1;
                h1 = hk;
            }
            double v = amp * (k % 2 ? -1.0 : 1.0) * hk * std::exp(-0.5 * s * s) / std::pow(width, k);
            return k == 0 ? v + c0 : v;
        }
        case Kind::custom: return custom(x, k);
        }
        return 0.0;
    }
};

struct Piece {
    std::vector<Form> comps;
    int order = kSmoothInf;

    static Piece constant(const State& u, int m) {
        Piece p;
        for (int c = 0; c < m; ++c) p.comps.push_back(Form::constant(u[c]));
        return p;
    }
    static Piece scalar(Form f, int order = kSmoothInf) {
        Piece p;
        p.comps.push_back(std::move(f));
        p.order = order;
        return p;
    }

    State d(double x, int k = 0) const {
        State u{};
        for (size_t c = 0; c < comps.size(); ++c) u[c] = comps[c].d(x, k);
        return u;
    }
};

struct InitialData {
    enum class Layout { line, disk, quadrants };
    Layout layout = Layout::line;
    int m = 1;
    double lo = 0.0, hi = 1.0;      // 1D domain (also x-range for 2D)
    std::vector<double> breaks;     // 1D, strictly increasing
    std::vector<Piece> pieces;      // line: breaks+1; disk: inside, outside; quadrants: ne, nw, sw, se
    double cx = 0.0, cy = 0.0, r2 = 0.0;

    int dim() const { return layout == Layout::line ? 1 : 2; }

    void validate() const {
        if (layout == Layout::line) {
            if (!(hi > lo)) throw std::invalid_argument("initial data: empty domain");
            if (pieces.size() != breaks.size() + 1) throw std::invalid_argument("initial data: piece count");
            for (size_t k = 1; k < breaks.size(); ++k)
                if (!(breaks[k] > breaks[k - 1])) throw std::invalid_argument("breakpoints must increase");
        } else if (layout == Layout::disk && pieces.size() != 2) {
            throw std::invalid_argument("disk data needs 2 pieces");
        } else if (layout == Layout::quadrants && pieces.size() != 4) {
            throw std::invalid_argument("quadrant data needs 4 pieces");
        }
        for (auto& p : pieces)
            if (static_cast<int>(p.comps.size()) != m) throw std::invalid_argument("component count");
    }

    size_t piece_at(double x) const {
        return static_cast<size_t>(std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin());
    }

    State eval(double x, double y = 0.0) const {
        switch (layout) {
        case Layout::line: return pieces[piece_at(x)].d(x, 0);
        case Layout::disk: {
            double r = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            return pieces[r <= r2 ? 0 : 1].d(x, 0);
        }
        case Layout::quadrants: {
            bool east = x >= cx, north = y >= cy;
            size_t k = north ? (east ? 0 : 1) : (east ? 3 : 2);
            return pieces[k].d(x, 0);
        }
        }
        return {};
    }

    State deriv(double x, int k = 1) const { return pieces[piece_at(x)].d(x, k); }

    // Interval of piece p clipped to the domain.
    std::pair<double, double> piece_interval(size_t p) const {
        double a = p == 0 ? lo : std::max(lo, breaks[p - 1]);
        double b = p == breaks.size() ? hi : std::min(hi, breaks[p]);
        return {a, b};
    }

    // jumps[b][k]: k-th derivative differs across breakpoint b (k <= kOrderCap).
    std::vector<std::vector<bool>> jump_flags() const {
        std::vector<std::vector<bool>> out;
        for (size_t b = 0; b < breaks.size(); ++b) {
            std::vector<bool> row(kOrderCap + 1, false);
            for (int k = 0; k <= kOrderCap; ++k) {
                State l = pieces[b].d(breaks[b], k), r = pieces[b + 1].d(breaks[b], k);
                for (int c = 0; c < m; ++c) {
                    double scale = 1.0 + std::abs(l[c]) + std::abs(r[c]);
                    if (std::abs(l[c] - r[c]) > 1e-12 * scale) row[k] = true;
                }
            }
            out.push_back(row);
        }
        return out;
    }

    // Number of value discontinuities present at t = 0.
    int discontinuity_count() const {
        if (layout == Layout::line) {
            int n = 0;
            for (auto& row : jump_flags()) n += row[0];
            return n;
        }
        auto differ = [&](size_t a, size_t b) {
            State u = pieces[a].d(cx, 0), v = pieces[b].d(cx, 0);
            for (int c = 0; c < m; ++c)
                if (u[c] != v[c]) return true;
            return false;
        };
        if (layout == Layout::disk) return differ(0, 1) ? 1 : 0;
        return differ(0, 1) + differ(1, 2) + differ(2, 3) + differ(3, 0);
    }

    int min_piece_order() const {
        int n = kSmoothInf;
        for (auto& p : pieces) n = std::min(n, p.order);
        return n;
    }

    // Constructors for the catalog shapes used by the registry.
    static InitialData riemann(double lo, double hi, double x0, const State& left, const State& right, int m) {
        InitialData d;
        d.m = m;
        d.lo = lo;
        d.hi = hi;
        d.breaks = {x0};
        d.pieces = {Piece::constant(left, m), Piece::constant(right, m)};
        return d;
    }
    static InitialData top_hat(double lo, double hi, double a, double b, double inside, double outside) {
        InitialData d;
        d.lo = lo;
        d.hi = hi;
        d.breaks = {a, b};
        d.pieces = {Piece::constant({outside}, 1), Piece::constant({inside}, 1), Piece::constant({outside}, 1)};
        return d;
    }
    static InitialData smooth(double lo, double hi, Form f) {
        InitialData d;
        d.lo = lo;
        d.hi = hi;
        d.pieces = {Piece::scalar(std::move(f))};
        return d;
    }
    static InitialData disk(double lo, double hi, double cx, double cy, double r2, const State& in,
                            const State& out, int m) {
        InitialData d;
        d.layout = Layout::disk;
        d.m = m;
        d.lo = lo;
        d.hi = hi;
        d.cx = cx;
        d.cy = cy;
        d.r2 = r2;
        d.pieces = {Piece::constant(in, m), Piece::constant(out, m)};
        return d;
    }
    static InitialData quadrants(double lo, double hi, double cx, double cy, const State& ne, const State& nw,
                                 const State& sw, const State& se, int m) {
        InitialData d;
        d.layout = Layout::quadrants;
        d.m = m;
        d.lo = lo;
        d.hi = hi;
        d.cx = cx;
        d.cy = cy;
        d.pieces = {Piece::constant(ne, m), Piece::constant(nw, m), Piece::constant(sw, m), Piece::constant(se, m)};
        return d;
    }
};

}  // namespace beacons
