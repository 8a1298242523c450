// Finite-volume reference solver: Rusanov and Roe fluxes, MUSCL-Hancock
// limited reconstruction, CFL stepping, Strang splitting in 2D.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "pde.hpp"

namespace beacons {

enum class FluxKind { lax_friedrichs, roe };
enum class Limiter { none, minmod, monotonized_centered, van_leer, superbee };

inline std::string to_string(FluxKind f) { return f == FluxKind::roe ? "roe" : "lax_friedrichs"; }

inline std::string to_string(Limiter l) {
    switch (l) {
    case Limiter::none: return "none";
    case Limiter::minmod: return "minmod";
    case Limiter::monotonized_centered: return "monotonized_centered";
    case Limiter::van_leer: return "van_leer";
    case Limiter::superbee: return "superbee";
    }
    return "none";
}

inline FluxKind flux_from_string(const std::string& s) {
    if (s == "roe") return FluxKind::roe;
    if (s == "lax_friedrichs" || s == "lxf") return FluxKind::lax_friedrichs;
    throw std::invalid_argument("unknown flux: " + s);
}

inline Limiter limiter_from_string(const std::string& s) {
    for (Limiter l : {Limiter::none, Limiter::minmod, Limiter::monotonized_centered, Limiter::van_leer,
                      Limiter::superbee})
        if (to_string(l) == s) return l;
    throw std::invalid_argument("unknown limiter: " + s);
}

struct SolverConfig {
    FluxKind flux = FluxKind::roe;
    Limiter limiter = Limiter::none;
    double cfl = 1.0;
    double t_end = 1.0;
    int frame_count = 2;

    void validate() const {
        if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
        if (frame_count < 1) throw std::invalid_argument("frame_count must be >= 1");
        if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be non-negative");
    }
};

inline State add_scaled(const State& a, double s, const State& b) {
    State r{};
    for (int k = 0; k < 4; ++k) r[k] = a[k] + s * b[k];
    return r;
}

inline State lax_friedrichs_flux(const PdeSystem& sys, const State& uL, const State& uR, int dir) {
    double lam = std::max(sys.max_wave_speed(uL, dir), sys.max_wave_speed(uR, dir));
    State fL = sys.flux(uL, dir), fR = sys.flux(uR, dir);
    State F{};
    for (int k = 0; k < sys.m; ++k) F[k] = 0.5 * (fL[k] + fR[k]) - 0.5 * lam * (uR[k] - uL[k]);
    return F;
}

// Harten-Hyman entropy fix: widen |lambda| near sonic points where the wave
// speed changes sign across the interface.
inline double entropy_fixed_speed(double lam, double lamL, double lamR) {
    double delta = std::max({0.0, lam - lamL, lamR - lam});
    double a = std::abs(lam);
    if (delta > 0.0 && a < delta) return 0.5 * (lam * lam + delta * delta) / delta;
    return a;
}

// Empty when the Roe average is undefined; callers fall back to Rusanov.
inline std::optional<State> try_roe_flux(const PdeSystem& sys, const State& uL, const State& uR, int dir) {
    if (!sys.valid(uL) || !sys.valid(uR)) throw std::domain_error("roe_flux: invalid state");
    State fL = sys.flux(uL, dir), fR = sys.flux(uR, dir);
    State F{};
    if (sys.kind != Kind::euler) {
        double lam = sys.kind == Kind::advection ? sys.params.a : 0.5 * (uL[0] + uR[0]);
        double lamL = sys.kind == Kind::advection ? lam : uL[0];
        double lamR = sys.kind == Kind::advection ? lam : uR[0];
        double s = entropy_fixed_speed(lam, lamL, lamR);
        F[0] = 0.5 * (fL[0] + fR[0]) - 0.5 * s * (uR[0] - uL[0]);
        return F;
    }
    if (uL == uR) {
        F = fL;
        return F;
    }
    const int m = sys.m, n = 1 + dir;
    const double g1 = sys.params.gamma - 1.0;
    double sl = std::sqrt(uL[0]), sr = std::sqrt(uR[0]);
    auto roe = [&](double a, double b) { return (sl * a + sr * b) / (sl + sr); };
    double un = roe(uL[n] / uL[0], uR[n] / uR[0]);
    double ut = 0.0;
    if (sys.dim == 2) ut = roe(uL[2 - dir] / uL[0], uR[2 - dir] / uR[0]);
    double HL = (uL[m - 1] + sys.pressure(uL)) / uL[0];
    double HR = (uR[m - 1] + sys.pressure(uR)) / uR[0];
    double H = roe(HL, HR);
    double c2 = g1 * (H - 0.5 * (un * un + ut * ut));
    if (!(c2 > 0.0) || !std::isfinite(c2)) return std::nullopt;
    double c = std::sqrt(c2);
    Eigensystem es = sys.euler_eigen(un, ut, H, c, dir);
    Eigensystem eL = sys.eigen(uL, dir), eR = sys.eigen(uR, dir);
    State du{};
    for (int k = 0; k < m; ++k) du[k] = uR[k] - uL[k];
    State diss{};
    for (int w = 0; w < m; ++w) {
        double alpha = 0.0;
        for (int k = 0; k < m; ++k) alpha += es.L[w][k] * du[k];
        double s = entropy_fixed_speed(es.lambda[w], eL.lambda[w], eR.lambda[w]);
        for (int k = 0; k < m; ++k) diss[k] += es.R[k][w] * s * alpha;
    }
    for (int k = 0; k < m; ++k) F[k] = 0.5 * (fL[k] + fR[k]) - 0.5 * diss[k];
    return F;
}

inline State roe_flux(const PdeSystem& sys, const State& uL, const State& uR, int dir) {
    if (auto f = try_roe_flux(sys, uL, uR, dir)) return *f;
    return lax_friedrichs_flux(sys, uL, uR, dir);
}

inline State numerical_flux(const PdeSystem& sys, FluxKind kind, const State& uL, const State& uR, int dir) {
    return kind == FluxKind::roe ? roe_flux(sys, uL, uR, dir) : lax_friedrichs_flux(sys, uL, uR, dir);
}

inline double limiter_eval(Limiter kind, double theta) {
    if (std::isnan(theta) || theta <= 0.0) return 0.0;
    switch (kind) {
    case Limiter::none: return 0.0;
    case Limiter::minmod: return std::min(1.0, theta);
    case Limiter::monotonized_centered:
        if (std::isinf(theta)) return 2.0;
        return std::min({2.0 * theta, 0.5 * (1.0 + theta), 2.0});
    case Limiter::van_leer:
        if (std::isinf(theta)) return 2.0;
        return 2.0 * theta / (1.0 + theta);
    case Limiter::superbee: return std::max(std::min(2.0 * theta, 1.0), std::min(theta, 2.0));
    }
    throw std::invalid_argument("unknown limiter");
}

struct StepInfo {
    double dt = 0.0;
    State flux_lo{};  // flux through the lower boundary of the last 1D sweep
    State flux_hi{};
};

namespace detail {

// Fill ghost layers of a line of n interior cells with g ghosts per side.
inline void fill_line_ghosts(std::vector<State>& line, int n, int g, Boundary bc) {
    for (int k = 1; k <= g; ++k) {
        if (bc == Boundary::periodic) {
            line[g - k] = line[g + n - k];
            line[g + n - 1 + k] = line[g + k - 1];
        } else {
            line[g - k] = line[g];
            line[g + n - 1 + k] = line[g + n - 1];
        }
    }
}

// One conservative update of a line (ghosts filled). Returns boundary fluxes.
inline std::pair<State, State> sweep_line(const PdeSystem& sys, const SolverConfig& cfg, std::vector<State>& line,
                                          int n, int g, double dtdx, int dir) {
    const int total = n + 2 * g;
    const int m = sys.m;
    // face states: lo/hi side of each cell after the half-step predictor
    std::vector<State> lo(line), hi(line);
    if (cfg.limiter != Limiter::none) {
        for (int i = 1; i < total - 1; ++i) {
            State slope{};
            for (int c = 0; c < m; ++c) {
                double fwd = line[i + 1][c] - line[i][c];
                double bwd = line[i][c] - line[i - 1][c];
                slope[c] = fwd == 0.0 ? 0.0 : limiter_eval(cfg.limiter, bwd / fwd) * fwd;
            }
            State a = add_scaled(line[i], -0.5, slope), b = add_scaled(line[i], 0.5, slope);
            if (!sys.valid(a) || !sys.valid(b)) continue;
            State fa = sys.flux(a, dir), fb = sys.flux(b, dir);
            for (int c = 0; c < m; ++c) {
                double corr = 0.5 * dtdx * (fb[c] - fa[c]);
                a[c] -= corr;
                b[c] -= corr;
            }
            if (!sys.valid(a) || !sys.valid(b)) continue;
            lo[i] = a;
            hi[i] = b;
        }
    }
    // interface k sits between cells k-1 and k, k in [g, g+n]
    std::vector<State> F(n + 1);
    for (int k = 0; k <= n; ++k) F[k] = numerical_flux(sys, cfg.flux, hi[g + k - 1], lo[g + k], dir);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < m; ++c) line[g + i][c] -= dtdx * (F[i + 1][c] - F[i][c]);
    return {F[0], F[n]};
}

inline void check_interior(const PdeSystem& sys, const StateField& f) {
    f.for_interior([&](int i, int j, const State& u) {
        if (!sys.valid(u))
            throw std::runtime_error("invalid post-step state at cell (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
    });
}

inline std::pair<State, State> sweep(const PdeSystem& sys, const SolverConfig& cfg, StateField& f, double dt,
                                     int dir) {
    const GridSpec& gr = f.grid;
    const int g = gr.ghost;
    const int n = gr.n[dir];
    const int lines = dir == 0 ? f.ny() : f.nx();
    const double dtdx = dt / gr.dx(dir);
    std::vector<State> line(n + 2 * g);
    std::pair<State, State> bflux{};
    for (int l = 0; l < lines; ++l) {
        for (int i = 0; i < n; ++i) line[g + i] = dir == 0 ? f.at(i, l) : f.at(l, i);
        fill_line_ghosts(line, n, g, gr.bc[dir]);
        bflux = sweep_line(sys, cfg, line, n, g, dtdx, dir);
        for (int i = 0; i < n; ++i) (dir == 0 ? f.at(i, l) : f.at(l, i)) = line[g + i];
    }
    return bflux;
}

}  // namespace detail

inline double stable_dt(const PdeSystem& sys, const StateField& f, double cfl) {
    double rate = 0.0;
    f.for_interior([&](int, int, const State& u) {
        for (int d = 0; d < f.grid.dim; ++d) rate = std::max(rate, sys.max_wave_speed(u, d) / f.grid.dx(d));
    });
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return cfl / rate;
}

// Advances in place by min(CFL step, dt_max).
inline StepInfo step_1d(const PdeSystem& sys, StateField& f, const SolverConfig& cfg,
                        double dt_max = std::numeric_limits<double>::infinity()) {
    StepInfo info;
    info.dt = std::min(stable_dt(sys, f, cfg.cfl), dt_max);
    if (!std::isfinite(info.dt)) throw std::runtime_error("step_1d: unbounded time step");
    auto [lo, hi] = detail::sweep(sys, cfg, f, info.dt, 0);
    info.flux_lo = lo;
    info.flux_hi = hi;
    detail::check_interior(sys, f);
    return info;
}

inline StepInfo step_2d(const PdeSystem& sys, StateField& f, const SolverConfig& cfg,
                        double dt_max = std::numeric_limits<double>::infinity()) {
    StepInfo info;
    info.dt = std::min(stable_dt(sys, f, cfg.cfl), dt_max);
    if (!std::isfinite(info.dt)) throw std::runtime_error("step_2d: unbounded time step");
    detail::sweep(sys, cfg, f, 0.5 * info.dt, 0);
    detail::sweep(sys, cfg, f, info.dt, 1);
    detail::sweep(sys, cfg, f, 0.5 * info.dt, 0);
    detail::check_interior(sys, f);
    return info;
}

inline StepInfo step(const PdeSystem& sys, StateField& f, const SolverConfig& cfg,
                     double dt_max = std::numeric_limits<double>::infinity()) {
    return f.grid.dim == 1 ? step_1d(sys, f, cfg, dt_max) : step_2d(sys, f, cfg, dt_max);
}

struct FrameSeries {
    std::string system;
    std::vector<std::string> components;
    std::vector<double> times;
    std::vector<StateField> frames;
    SolverConfig config;

    const GridSpec& grid() const { return frames.front().grid; }
};

using InitialFn = std::function<State(double, double)>;

// Point values at cell centres.
inline StateField sample_field(const PdeSystem& sys, const GridSpec& grid, const InitialFn& u0) {
    StateField f(grid, sys.m);
    for (int j = 0; j < f.ny(); ++j)
        for (int i = 0; i < f.nx(); ++i) {
            double x = grid.center(0, i);
            double y = grid.dim == 2 ? grid.center(1, j) : 0.0;
            f.at(i, j) = u0(x, y);
        }
    detail::check_interior(sys, f);
    return f;
}

inline std::vector<double> frame_times(const SolverConfig& cfg) {
    std::vector<double> t(cfg.frame_count);
    if (cfg.frame_count == 1) {
        t[0] = cfg.t_end;
        return t;
    }
    for (int k = 0; k < cfg.frame_count; ++k) t[k] = cfg.t_end * k / (cfg.frame_count - 1);
    t.back() = cfg.t_end;
    return t;
}

// Observer gets each accepted step; used by conservation checks.
using StepObserver = std::function<void(const StateField&, const StepInfo&)>;

inline FrameSeries run_simulation(const PdeSystem& sys, const GridSpec& grid, const InitialFn& u0,
                                  const SolverConfig& cfg, const StepObserver& observer = {}) {
    cfg.validate();
    if (grid.dim != sys.dim) throw std::invalid_argument("grid and system dimension differ");
    FrameSeries out;
    out.system = sys.name;
    out.components = sys.component_names();
    out.config = cfg;
    StateField f = sample_field(sys, grid, u0);
    double t = 0.0;
    for (double target : frame_times(cfg)) {
        while (t < target) {
            double dt_cfl = stable_dt(sys, f, cfg.cfl);
            if (!std::isfinite(dt_cfl)) {
                t = target;  // nothing moves
                break;
            }
            StepInfo info = step(sys, f, cfg, target - t);
            t = info.dt >= target - t ? target : t + info.dt;
            if (observer) observer(f, info);
        }
        out.times.push_back(target);
        out.frames.push_back(f);
    }
    return out;
}

}  // namespace beacons
