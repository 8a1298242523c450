// Worst-case L-infinity bound arithmetic: shallow rates, composition, chain folds.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepnet.hpp"

namespace beacons {

// C_M * N^(-n/d) with C_M = 1.
inline double shallow_rate(long N, int n, int d) {
    if (N < 1 || d < 1 || n < 0) throw std::invalid_argument("shallow_rate needs N >= 1, d >= 1, n >= 0");
    if (n == 0) return 1.0;
    return std::pow(static_cast<double>(N), -static_cast<double>(n) / static_cast<double>(d));
}

// ||f o g - f~ o g~|| <= e_f + L e_g
inline double compose_bound(double e_f, double L, double e_g) {
    for (double v : {e_f, L, e_g})
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("compose_bound inputs must be finite and >= 0");
    return e_f + L * e_g;
}

enum class StageKind { learned, analytic, rescale };

inline std::string to_string(StageKind k) {
    switch (k) {
    case StageKind::learned: return "learned";
    case StageKind::analytic: return "analytic_map";
    case StageKind::rescale: return "rescale";
    }
    return "?";
}

inline StageKind stage_kind_from_string(const std::string& s) {
    for (auto k : {StageKind::learned, StageKind::analytic, StageKind::rescale})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown stage kind: " + s);
}

struct ChainStage {
    StageKind kind = StageKind::learned;
    AnalyticMap map;             // analytic
    double scale = 1.0;          // rescale: x -> scale x + shift
    double shift = 0.0;
    bool head = false;           // learned
    long N = 1;
    int n = 0;                   // order used for the smooth bound
    int n_nonsmooth = 0;         // head only
    int d = 1;

    static ChainStage learned_stage(long N, int n, int d, bool head = false, int n_nonsmooth = 0) {
        ChainStage s;
        s.kind = StageKind::learned;
        s.N = N;
        s.n = n;
        s.d = d;
        s.head = head;
        s.n_nonsmooth = head ? n_nonsmooth : n;
        return s;
    }
    static ChainStage analytic_stage(const AnalyticMap& m) {
        ChainStage s;
        s.kind = StageKind::analytic;
        s.map = m;
        return s;
    }
    static ChainStage rescale_stage(double scale, double shift) {
        ChainStage s;
        s.kind = StageKind::rescale;
        s.scale = scale;
        s.shift = shift;
        return s;
    }

    double lipschitz() const {
        if (kind == StageKind::analytic) return map.lipschitz();
        if (kind == StageKind::rescale) return std::abs(scale);
        return 1.0;
    }
};

struct Interval {
    double lo = 0.0, hi = 0.0;
    bool inside(const Interval& o) const { return lo >= o.lo && hi <= o.hi; }
};

// Stages in application order. The head maps the inputs into [0, 1]; every
// non-head learned stage realizes the analytic map right before it.
struct CompositionChain {
    std::vector<ChainStage> stages;

    // Throws invalid_argument naming the first violation.
    void validate() const {
        if (stages.empty() || stages[0].kind != StageKind::learned || !stages[0].head)
            throw std::invalid_argument("chain must start with its head stage");
        Interval r{0.0, 1.0};
        for (size_t k = 0; k < stages.size(); ++k) {
            const auto& s = stages[k];
            const std::string at = "stage " + std::to_string(k) + ": ";
            switch (s.kind) {
            case StageKind::learned:
                if (s.N < 1 || s.d < 1 || s.n < 0 || s.n_nonsmooth < 0)
                    throw std::invalid_argument(at + "learned stage needs N, d >= 1 and n >= 0");
                if (k > 0 && s.head) throw std::invalid_argument(at + "more than one head stage");
                if (k > 0 && stages[k - 1].kind != StageKind::analytic)
                    throw std::invalid_argument(at + "learned stage does not follow an analytic map");
                break;
            case StageKind::analytic: {
                if (auto why = s.map.inadmissible()) throw std::invalid_argument(at + *why);
                const double G = s.map.domain();
                if (!r.inside({-G, G}))
                    throw std::invalid_argument(at + "range containment violated: input range not inside the map's domain");
                r = {-1.0, 1.0};
                break;
            }
            case StageKind::rescale:
                if (!std::isfinite(s.scale) || !std::isfinite(s.shift) || s.scale == 0.0)
                    throw std::invalid_argument(at + "rescale needs a finite nonzero scale");
                r = s.scale > 0 ? Interval{s.scale * r.lo + s.shift, s.scale * r.hi + s.shift}
                                : Interval{s.scale * r.hi + s.shift, s.scale * r.lo + s.shift};
                break;
            }
        }
    }
};

struct DerivationStep {
    std::string rule;  // mhaskar_rate | composition | lipschitz_product | max_split
    std::vector<double> inputs;
    double output = 0.0;
};

// Output of a rule applied to its inputs; nullopt for an unknown rule or arity.
inline std::optional<double> apply_rule(const std::string& rule, const std::vector<double>& in) {
    if (rule == "mhaskar_rate" && in.size() == 3) {
        const double N = in[0], n = in[1], d = in[2];
        if (N != std::floor(N) || n != std::floor(n) || d != std::floor(d) || N < 1 || d < 1 || n < 0)
            return std::nullopt;
        return shallow_rate(static_cast<long>(N), static_cast<int>(n), static_cast<int>(d));
    }
    if (rule == "composition" && in.size() == 3) {
        for (double v : in)
            if (!(v >= 0.0) || !std::isfinite(v)) return std::nullopt;
        return compose_bound(in[0], in[1], in[2]);
    }
    if (rule == "lipschitz_product" && in.size() == 2) return in[0] * in[1];
    if (rule == "max_split" && in.size() == 2) return std::max(in[0], in[1]);
    return std::nullopt;
}

namespace detail {

inline double push_step(std::vector<DerivationStep>& out, std::string rule, std::vector<double> in) {
    const double v = *apply_rule(rule, in);
    out.push_back({std::move(rule), std::move(in), v});
    return v;
}

inline double fold_chain(const CompositionChain& c, bool nonsmooth, std::vector<DerivationStep>& out) {
    double acc = 0.0, pending = 1.0;
    bool has_pending = false;
    for (const auto& s : c.stages) {
        if (s.kind == StageKind::learned) {
            const int n = nonsmooth ? s.n_nonsmooth : s.n;
            const double rate = push_step(out, "mhaskar_rate", {double(s.N), double(n), double(s.d)});
            if (s.head) {
                acc = rate;
            } else {
                acc = push_step(out, "composition", {rate, pending, acc});
                pending = 1.0;
                has_pending = false;
            }
        } else {
            const double L = s.lipschitz();
            pending = has_pending ? push_step(out, "lipschitz_product", {pending, L}) : L;
            has_pending = true;
        }
    }
    if (has_pending) acc = push_step(out, "composition", {0.0, pending, acc});
    return acc;
}

}  // namespace detail

struct ChainBound {
    double smooth = 0.0;
    std::optional<double> nonsmooth;  // nullopt: no bound
    std::string no_bound_reason;
    std::vector<DerivationStep> steps;
};

// Smooth fold, then (unless no_bound_reason is given) the non-smooth fold and max_split.
inline ChainBound chain_bound(const CompositionChain& c, const std::string& no_bound_reason = "") {
    c.validate();
    ChainBound b;
    b.smooth = detail::fold_chain(c, false, b.steps);
    if (!no_bound_reason.empty()) {
        b.no_bound_reason = no_bound_reason;
        return b;
    }
    const double raw = detail::fold_chain(c, true, b.steps);
    b.nonsmooth = detail::push_step(b.steps, "max_split", {b.smooth, raw});
    return b;
}

}  // namespace beacons
