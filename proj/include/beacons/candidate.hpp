// Greedy search over the analytic-map catalog using small probe networks.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bounds.hpp"

namespace beacons {

struct CandidateBudget {
    int probe_width = 16;
    int probe_steps = 200;
    double probe_lr = 0.1;
    size_t max_points = 2000;
    std::vector<double> C_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    uint64_t seed = 0;

    void validate() const {
        if (probe_width < 1 || probe_steps < 1 || max_points < 1) throw std::invalid_argument("empty probe budget");
        if (C_grid.empty()) throw std::invalid_argument("candidate search needs at least one C");
    }
};

struct CandidateTrial {
    int stage = 0;  // application order
    AnalyticMap map;
    bool admissible = true;
    std::string reason;
    double e_probe = 0.0;   // sup probe error on the stage's input targets
    double estimate = 0.0;  // estimated final error, [0, 1] range units
    std::string flag;
};

struct CandidateReport {
    std::vector<AnalyticMap> chosen;  // application order
    std::vector<CandidateTrial> trials;
    std::vector<std::string> warnings;
    double estimate = 0.0;
};

inline std::vector<AnalyticMap> catalog(const std::vector<double>& C_grid) {
    std::vector<AnalyticMap> out;
    for (auto f : {MapForm::identity, MapForm::arcsinh, MapForm::arctan, MapForm::tanh})
        for (double C : C_grid) out.push_back({f, C});
    return out;
}

// x: n x d_in normalized inputs; z: n values of one component already in [-1, 1].
// Picks `stages` maps, outermost first, each minimizing the estimated chain error.
inline CandidateReport candidate_search(const std::vector<double>& x, const std::vector<double>& z, int d_in,
                                        int stages, const CandidateBudget& budget) {
    budget.validate();
    if (d_in < 1 || z.empty() || x.size() != z.size() * static_cast<size_t>(d_in))
        throw std::invalid_argument("candidate search needs matching, non-empty samples");
    if (stages < 0) throw std::invalid_argument("negative stage count");
    CandidateReport rep;
    const auto [zmin, zmax] = std::minmax_element(z.begin(), z.end());
    if (!std::isfinite(*zmin) || !std::isfinite(*zmax)) throw std::invalid_argument("non-finite samples");
    if (*zmin == *zmax) {
        rep.chosen.assign(stages, AnalyticMap{MapForm::identity, 1.0});
        rep.warnings.push_back("degenerate range: identity stages, bound set by the head rate");
        return rep;
    }

    const size_t stride = (z.size() + budget.max_points - 1) / budget.max_points;
    Dataset probe;
    probe.d_in = d_in;
    probe.d_out = 1;
    std::vector<double> t;
    for (size_t k = 0; k < z.size(); k += stride) {
        double v = std::clamp(z[k], -1.0, 1.0);
        probe.add(&x[k * d_in], &v);
        t.push_back(v);
    }
    TrainConfig tc;
    tc.lr = budget.probe_lr;
    tc.min_epochs = 1;
    tc.max_epochs = 1;
    tc.steps_per_epoch = budget.probe_steps;
    tc.tol = 0.0;
    tc.seed = budget.seed;

    std::map<std::vector<double>, double> cache;
    auto probe_error = [&](const std::vector<double>& y) {
        if (auto it = cache.find(y); it != cache.end()) return it->second;
        probe.Y = y;
        Mlp net = shallow_mlp(d_in, budget.probe_width, 1, budget.seed, 0x9b0be);
        train_supervised(net, probe, tc);
        double e = 0.0;
        for (size_t k = 0; k < y.size(); ++k)
            e = std::max(e, std::abs(net.forward(&probe.X[k * d_in])[0] - y[k]));
        cache.emplace(y, e);
        return e;
    };

    // gain: product of normalized Lipschitz constants of the stages already chosen (outer ones).
    double gain = 1.0;
    std::vector<AnalyticMap> outer_first;
    for (int s = stages; s-- > 0;) {
        std::optional<size_t> best;
        for (const auto& m : catalog(budget.C_grid)) {
            CandidateTrial tr;
            tr.stage = s;
            tr.map = m;
            if (auto why = m.inadmissible()) {
                tr.admissible = false;
                tr.reason = *why;
                rep.trials.push_back(tr);
                continue;
            }
            std::vector<double> y(t.size());
            bool ok = true;
            for (size_t k = 0; k < t.size(); ++k) {
                y[k] = m.normalized_inverse(t[k]);
                ok = ok && std::isfinite(y[k]) && std::abs(y[k]) <= 1.0 + 1e-12;
            }
            if (!ok) {
                tr.admissible = false;
                tr.reason = "range(u) not contained in range(f)";
                rep.trials.push_back(tr);
                continue;
            }
            tr.e_probe = probe_error(y);
            tr.estimate = tr.e_probe * (gain * m.domain() * m.lipschitz()) / 2.0;
            if (m.form == MapForm::identity)
                tr.flag = "no actual advantage: e_g grows exactly as 1/L, chain bound invariant in C";
            rep.trials.push_back(tr);
            if (!best || tr.estimate < rep.trials[*best].estimate) best = rep.trials.size() - 1;
        }
        if (!best) {
            rep.warnings.push_back("stage " + std::to_string(s) + ": no admissible candidate, identity used");
            outer_first.push_back({MapForm::identity, 1.0});
            continue;
        }
        const AnalyticMap chosen = rep.trials[*best].map;
        rep.estimate = rep.trials[*best].estimate;
        // targets for the next (inner) stage
        std::vector<double> next(t.size());
        for (size_t k = 0; k < t.size(); ++k) next[k] = chosen.normalized_inverse(t[k]);
        t = std::move(next);
        gain *= chosen.domain() * chosen.lipschitz();
        outer_first.push_back(chosen);
    }
    rep.chosen.assign(outer_first.rbegin(), outer_first.rend());
    if (stages == 0) {
        std::vector<double> y = t;
        rep.estimate = probe_error(y) / 2.0;
    }
    return rep;
}

}  // namespace beacons
