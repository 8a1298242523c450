// Problem registry: the six benchmark problems plus convergence problems.
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepnet.hpp"
#include "initial_data.hpp"

namespace beacons {

// One published table row, kept for reference only.
struct ReferenceRow {
    std::string arch;
    double l_inf_final, l2_final, l_inf_all, l2_all;
    std::optional<double> conservation_final, conservation_total;
};

struct ReferenceBound {
    std::string arch;
    double smooth;
    std::optional<double> nonsmooth;  // nullopt: no bound was proved
    long proof_steps;
};

struct ProblemSpec {
    std::string id;
    std::string system;
    GridSpec grid;
    InitialData initial;
    SolverConfig solver;
    int train_frames = 1;
    bool conditional = false;
    bool convergence_only = false;
    std::vector<ArchitectureSpec> archs;
    std::vector<ReferenceRow> reference_rows;
    std::vector<ReferenceBound> reference_bounds;

    double train_fraction() const { return static_cast<double>(train_frames) / solver.frame_count; }
    InitialFn initial_fn() const {
        InitialData u0 = initial;
        return [u0](double x, double y) { return u0.eval(x, y); };
    }
    void validate() const {
        grid.validate();
        solver.validate();
        if (!(train_fraction() > 0.0 && train_fraction() < 1.0))
            throw std::invalid_argument(id + ": train fraction must lie in (0, 1)");
        for (auto& a : archs) a.validate();
    }
};

namespace detail {

inline std::vector<ArchitectureSpec> archs(std::initializer_list<const char*> ids) {
    std::vector<ArchitectureSpec> v;
    for (auto s : ids) v.push_back(ArchitectureSpec::parse(s));
    return v;
}

inline ProblemSpec problem(std::string id, std::string system, GridSpec g, InitialData u0, double cfl, double t_end,
                           int frames, int train) {
    ProblemSpec p;
    p.id = std::move(id);
    p.system = std::move(system);
    p.grid = g;
    p.initial = std::move(u0);
    p.solver = {FluxKind::roe, Limiter::minmod, cfl, t_end, frames};
    p.train_frames = train;
    return p;
}

}  // namespace detail

inline std::vector<ProblemSpec> registry() {
    using detail::archs;
    using detail::problem;
    std::vector<ProblemSpec> r;
    const auto four = archs({"plain:6:64", "plain:8:128", "beacons:6:64", "beacons:8:128"});
    const auto two = archs({"plain:8:128", "beacons:8:128"});

    {
        auto p = problem("advection1d", "advection1d", GridSpec::line(-1, 1, 1024),
                         InitialData::riemann(-1, 1, 0.0, {1.0}, {0.0}, 1), 1.0, 1.0, 100, 33);
        p.archs = four;
        p.reference_rows = {{"plain:6:64", 1.033641, 2.536744, 1.076130, 3.002461, -21.169941, 498.706193},
                            {"plain:8:128", 0.976984, 9.030859, 1.002587, 4.807408, -130.422471, -4391.640256},
                            {"beacons:6:64", 0.612160, 1.132093, 0.782192, 1.061877, -3.770073, -155.321387},
                            {"beacons:8:128", 0.605036, 1.211529, 0.633319, 1.189765, 1.881948, 49.570335}};
        p.reference_bounds = {{"beacons:6:64", 0.903602, 0.903602, 99}, {"beacons:8:128", 0.707106, 0.707106, 99}};
        r.push_back(std::move(p));
    }
    {
        auto p = problem("advection2d", "advection2d", GridSpec::square(-1, 1, 256),
                         InitialData::disk(-1, 1, -0.5, -0.5, 0.33, {1.0}, {0.0}, 1), 1.0, 1.0, 100, 33);
        p.archs = two;
        p.reference_rows = {{"plain:8:128", 1.031098, 40.481536, 1.031098, 22.772318, {}, {}},
                            {"beacons:8:128", 0.864784, 9.363477, 0.938123, 6.747000, {}, {}}};
        p.reference_bounds = {{"beacons:6:64", 1.216729, 1.483672, 187}, {"beacons:8:128", 1.0, 1.259921, 187}};
        r.push_back(std::move(p));
    }
    {
        auto p = problem("burgers1d", "burgers1d", GridSpec::line(0, 6, 1024),
                         InitialData::top_hat(0, 6, 2.0, 4.0, 3.0, -1.0), 1.0, 1.0, 100, 33);
        p.archs = four;
        p.reference_rows = {{"plain:6:64", 1.310069, 15.058654, 1.311499, 8.144540, 69.348586, 2254.019031},
                            {"plain:8:128", 1.208962, 12.127816, 1.307407, 6.691768, 30.707755, 1442.490291},
                            {"beacons:6:64", 0.986979, 2.165441, 0.973603, 1.554421, 4.459920, -0.569301},
                            {"beacons:8:128", 1.028023, 2.404486, 1.014091, 1.636904, 12.788327, -35.540890}};
        p.reference_bounds = {{"beacons:6:64", 1.216728, 1.483672, 163}, {"beacons:8:128", 1.0, 1.259921, 163}};
        r.push_back(std::move(p));
    }
    {
        auto p = problem("burgers2d", "burgers2d", GridSpec::square(-1, 1, 256),
                         InitialData::disk(-1, 1, -0.5, -0.5, 0.33, {1.0}, {0.0}, 1), 1.0, 1.0, 100, 33);
        p.archs = two;
        p.reference_rows = {{"plain:8:128", 0.976685, 37.415877, 0.653738, 17.396335, {}, {}},
                            {"beacons:8:128", 0.319521, 2.688830, 0.595719, 1.888049, {}, {}}};
        p.reference_bounds = {{"beacons:6:64", 1.483672, std::nullopt, 0}, {"beacons:8:128", 1.259921, std::nullopt, 0}};
        r.push_back(std::move(p));
    }
    {
        auto p = problem("euler1d", "euler1d", GridSpec::line(0, 1, 2048),
                         InitialData::riemann(0, 1, 0.5, {1.0, 0.0, 2.5}, {0.125, 0.0, 0.25}, 3), 0.95, 0.2, 200, 66);
        p.conditional = true;
        p.archs = four;
        p.reference_rows = {{"plain:6:64", 0.230453, 4.522916, 0.444256, 2.075029, 133.878340, 6219.332405},
                            {"plain:8:128", 0.159231, 3.002094, 0.452337, 1.546402, 83.996340, 5127.036345},
                            {"beacons:6:64", 0.076894, 1.004591, 0.422681, 0.758668, 3.343495, 281.148077},
                            {"beacons:8:128", 0.080181, 0.411615, 0.523623, 0.328464, -0.991722, -211.287987}};
        p.reference_bounds = {{"beacons:6:64", 0.903602, 0.903602, 98532}, {"beacons:8:128", 0.707106, 0.707106, 98532}};
        r.push_back(std::move(p));
    }
    {
        auto p = problem("euler2d", "euler2d", GridSpec::square(0, 1, 256),
                         InitialData::quadrants(0, 1, 0.8, 0.8, {1.5, 0.0, 0.0, 3.75}, {0.5323, 0.641954, 0.0, 1.1371},
                                                {0.138, 0.166428, 0.166428, 0.273212},
                                                {0.5323, 0.0, 0.641954, 1.1371}, 4),
                         0.95, 0.8, 100, 33);
        p.conditional = true;
        p.archs = two;
        p.reference_rows = {{"plain:8:128", 0.546258, 25.843028, 0.536434, 12.315916, {}, {}},
                            {"beacons:8:128", 0.198093, 2.958570, 0.310002, 1.539846, {}, {}}};
        p.reference_bounds = {{"beacons:6:64", 1.216729, 1.483672, 142104}, {"beacons:8:128", 1.0, 1.259921, 142104}};
        r.push_back(std::move(p));
    }
    // Convergence problems: smooth periodic data, no networks.
    {
        auto p = problem("advection1d_sine", "advection1d", GridSpec::line(0, 1, 256, Boundary::periodic),
                         InitialData::smooth(0, 1, Form::sum_of_sines({{1.0, 2 * std::numbers::pi, 0.0}})), 0.8, 1.0,
                         10, 3);
        p.convergence_only = true;
        r.push_back(std::move(p));
    }
    {
        auto p = problem("burgers1d_sine", "burgers1d", GridSpec::line(0, 1, 256, Boundary::periodic),
                         InitialData::smooth(0, 1, Form::sum_of_sines({{0.5, 2 * std::numbers::pi, 0.0}})), 0.8, 0.1,
                         10, 3);
        p.convergence_only = true;
        r.push_back(std::move(p));
    }
    return r;
}

inline ProblemSpec find_problem(const std::string& id) {
    for (auto& p : registry())
        if (p.id == id) return p;
    throw std::invalid_argument("unknown problem: " + id);
}

// Paper scale, the desk preset, or a numeric resolution factor.
struct Scale {
    std::string name = "paper";
    double resolution = 1.0;  // 1D factor; 2D uses resolution_2d
    double resolution_2d = 1.0;
    bool desk_archs = false;

    static Scale parse(const std::string& s) {
        if (s == "paper") return {};
        if (s == "desk") return {"desk", 0.5, 0.25, true};
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || !(v > 0.0) || v > 1.0)
            throw std::invalid_argument("scale must be paper, desk or a factor in (0, 1]");
        return {s, v, v, true};
    }
};

inline ProblemSpec scaled(ProblemSpec p, const Scale& s) {
    const double f = p.grid.dim == 1 ? s.resolution : s.resolution_2d;
    for (int k = 0; k < p.grid.dim; ++k) p.grid.n[k] = std::max(8, static_cast<int>(std::lround(p.grid.n[k] * f)));
    if (s.desk_archs && !p.convergence_only)
        p.archs = detail::archs({"plain:4:32", "plain:6:64", "beacons:4:32", "beacons:6:64"});
    return p;
}

}  // namespace beacons
