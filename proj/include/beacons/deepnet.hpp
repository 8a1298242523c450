// Deep architectures built from shallow nets: plain stacked baselines and
// BEACONS chains (learned head, then learned approximants of monotone maps).
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fv.hpp"
#include "train.hpp"

namespace beacons {

enum class ArchKind { plain, beacons };

inline std::string to_string(ArchKind k) { return k == ArchKind::plain ? "plain" : "beacons"; }

struct ArchitectureSpec {
    ArchKind kind = ArchKind::beacons;
    int layers = 2;
    int width = 16;

    void validate() const {
        if (layers < 2) throw std::invalid_argument("architecture needs at least 2 layers");
        if (width < 1) throw std::invalid_argument("architecture width must be >= 1");
    }
    std::string id() const { return to_string(kind) + ":" + std::to_string(layers) + ":" + std::to_string(width); }

    // "kind:layers:width"
    static ArchitectureSpec parse(const std::string& s) {
        ArchitectureSpec a;
        std::istringstream in(s);
        std::string kind, layers, width;
        if (!std::getline(in, kind, ':') || !std::getline(in, layers, ':') || !std::getline(in, width) ||
            layers.empty() || width.empty())
            throw std::invalid_argument("architecture must look like kind:layers:width, got '" + s + "'");
        if (kind == "plain") a.kind = ArchKind::plain;
        else if (kind == "beacons") a.kind = ArchKind::beacons;
        else throw std::invalid_argument("unknown architecture kind: " + kind);
        size_t p1 = 0, p2 = 0;
        try {
            a.layers = std::stoi(layers, &p1);
            a.width = std::stoi(width, &p2);
        } catch (const std::exception&) {
            throw std::invalid_argument("architecture layers/width must be integers: " + s);
        }
        if (p1 != layers.size() || p2 != width.size()) throw std::invalid_argument("trailing characters in " + s);
        a.validate();
        return a;
    }
};

enum class MapForm { identity, arcsinh, arctan, tanh };

inline std::string to_string(MapForm f) {
    switch (f) {
    case MapForm::identity: return "identity_over_C";
    case MapForm::arcsinh: return "arcsinh";
    case MapForm::arctan: return "arctan";
    case MapForm::tanh: return "tanh";
    }
    return "?";
}

inline MapForm map_form_from_string(const std::string& s) {
    for (auto f : {MapForm::identity, MapForm::arcsinh, MapForm::arctan, MapForm::tanh})
        if (to_string(f) == s) return f;
    throw std::invalid_argument("unknown map form: " + s);
}

// Strictly increasing f with parameter C, restricted to the domain [-G, G]
// that it maps onto [-1, 1]:
//   identity_over_C  f = x / C              G = C
//   arcsinh          f = arcsinh(x) / C     G = sinh C
//   arctan           f = arctan(x) / C      G = tan C   (C < pi/2)
//   tanh             f = tanh(x) / tanh C   G = C
struct AnalyticMap {
    MapForm form = MapForm::identity;
    double C = 1.0;

    std::optional<std::string> inadmissible() const {
        if (!(C > 0.0) || !std::isfinite(C)) return "C must be positive";
        if (form == MapForm::arctan && !(C < std::numbers::pi / 2))
            return "range(arctan)/C does not contain [-1, 1] for C >= pi/2";
        if (!std::isfinite(domain())) return "domain overflows";
        return std::nullopt;
    }
    void validate() const {
        if (auto why = inadmissible()) throw std::invalid_argument("analytic map: " + *why);
    }

    double domain() const {
        switch (form) {
        case MapForm::identity: return C;
        case MapForm::arcsinh: return std::sinh(C);
        case MapForm::arctan: return std::tan(C);
        case MapForm::tanh: return C;
        }
        return 0.0;
    }
    double f(double x) const {
        switch (form) {
        case MapForm::identity: return x / C;
        case MapForm::arcsinh: return std::asinh(x) / C;
        case MapForm::arctan: return std::atan(x) / C;
        case MapForm::tanh: return std::tanh(x) / std::tanh(C);
        }
        return 0.0;
    }
    double inverse(double z) const {
        switch (form) {
        case MapForm::identity: return C * z;
        case MapForm::arcsinh: return std::sinh(C * z);
        case MapForm::arctan: return std::tan(C * z);
        case MapForm::tanh: return std::atanh(z * std::tanh(C));
        }
        return 0.0;
    }
    // sup |f'| over the domain (attained at 0 for every form).
    double lipschitz() const { return form == MapForm::tanh ? 1.0 / std::tanh(C) : 1.0 / C; }

    // The stage a learned net approximates: s -> f(G s) on [-1, 1].
    double normalized(double s) const { return f(domain() * s); }
    double normalized_inverse(double z) const { return inverse(z) / domain(); }
};

struct SmoothStage {
    AnalyticMap map;
    Mlp net;           // 1 -> N -> 1, approximates map.normalized
    double e_f = 0.0;  // measured sup error on a dense grid of [-1, 1]
};

// One scalar field: z = 2 (u - lo) / (hi - lo) - 1 = stages(head(x)).
struct BeaconsChain {
    double lo = 0.0, hi = 1.0;
    Mlp head;          // d_in -> N -> 1
    double e_g = 0.0;  // measured sup error of the head on its training targets
    std::vector<SmoothStage> stages;

    double to_unit(double u) const { return 2.0 * (u - lo) / (hi - lo) - 1.0; }
    double from_unit(double z) const { return lo + (hi - lo) * (z + 1.0) * 0.5; }

    // Exact inverses of the downstream maps applied to a normalized value.
    double head_target(double z) const {
        double s = z;
        for (size_t k = stages.size(); k-- > 0;) s = stages[k].map.normalized_inverse(s);
        return s;
    }
    double compose_exact(double s) const {
        for (auto& st : stages) s = st.map.normalized(s);
        return s;
    }

    double eval_unit(const double* xn) const {
        double s = head.forward(xn)[0];
        for (auto& st : stages) s = st.net.forward(&s)[0];
        return s;
    }
    double eval(const double* xn) const { return from_unit(eval_unit(xn)); }
};

struct StageHistory {
    std::string stage;
    TrainResult result;
};

struct DeepNet {
    ArchitectureSpec arch;
    uint64_t seed = 0;
    Normalizer inputs;
    int m = 1;
    std::vector<double> lo, hi;        // per-component target range (plain)
    Mlp plain;                         // plain: d_out = m, targets in [-1, 1]
    std::vector<BeaconsChain> chains;  // beacons: one per component
    std::vector<StageHistory> history;

    int d_in() const { return inputs.dims; }

    std::vector<double> eval(const double* point) const {
        double xn[3];
        inputs.apply(point, xn);
        std::vector<double> u(m);
        if (arch.kind == ArchKind::plain) {
            auto y = plain.forward(xn);
            for (int c = 0; c < m; ++c) u[c] = lo[c] + (hi[c] - lo[c]) * (y[c] + 1.0) * 0.5;
        } else {
            for (int c = 0; c < m; ++c) u[c] = chains[c].eval(xn);
        }
        return u;
    }
};

// Points are (t, x[, y]) rows; returns one state per point.
inline std::vector<State> infer(const DeepNet& net, const std::vector<double>& points) {
    const int d = net.d_in();
    std::vector<State> out(points.size() / d);
    for (size_t k = 0; k < out.size(); ++k) {
        auto u = net.eval(&points[k * d]);
        for (int c = 0; c < net.m; ++c) out[k][c] = u[c];
    }
    return out;
}

// Cell-centre samples of frames [begin, end), every `stride`-th cell per axis.
inline Dataset frames_dataset(const FrameSeries& s, size_t begin, size_t end, int stride = 1) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (begin >= end || end > s.frames.size()) throw std::invalid_argument("frame window out of range");
    const auto& g = s.grid();
    Dataset d;
    d.d_in = 1 + g.dim;
    d.d_out = s.frames.front().m;
    double x[3], y[4];
    for (size_t k = begin; k < end; ++k) {
        const auto& f = s.frames[k];
        for (int j = 0; j < f.ny(); j += g.dim == 2 ? stride : 1)
            for (int i = 0; i < f.nx(); i += stride) {
                x[0] = s.times[k];
                x[1] = g.center(0, i);
                if (g.dim == 2) x[2] = g.center(1, j);
                for (int c = 0; c < d.d_out; ++c) y[c] = f.at(i, j)[c];
                d.add(x, y);
            }
    }
    return d;
}

inline Normalizer frames_normalizer(const FrameSeries& s) {
    const auto& g = s.grid();
    std::vector<std::pair<double, double>> axes{{s.times.front(), s.times.back()}};
    for (int k = 0; k < g.dim; ++k) axes.push_back({g.lo[k], g.hi[k]});
    if (!(axes[0].second > axes[0].first)) axes[0].second = axes[0].first + 1.0;
    return Normalizer::box(axes);
}

inline std::pair<std::vector<double>, std::vector<double>> target_range(const Dataset& d) {
    std::vector<double> lo(d.d_out, INFINITY), hi(d.d_out, -INFINITY);
    for (size_t s = 0; s < d.size(); ++s)
        for (int c = 0; c < d.d_out; ++c) {
            lo[c] = std::min(lo[c], d.Y[s * d.d_out + c]);
            hi[c] = std::max(hi[c], d.Y[s * d.d_out + c]);
        }
    for (int c = 0; c < d.d_out; ++c)
        if (!(hi[c] - lo[c] > 1e-12 * (1.0 + std::abs(lo[c])))) hi[c] = lo[c] + 1.0;  // constant component
    return {lo, hi};
}

inline Dataset normalized_inputs(const Dataset& d, const Normalizer& n) {
    Dataset out = d;
    for (size_t s = 0; s < d.size(); ++s) n.apply(&d.X[s * d.d_in], &out.X[s * d.d_in]);
    return out;
}

inline DeepNet train_plain(const Dataset& data, const Normalizer& inputs, const ArchitectureSpec& arch,
                           const TrainConfig& cfg) {
    arch.validate();
    if (arch.kind != ArchKind::plain) throw std::invalid_argument("train_plain needs a plain architecture");
    DeepNet net;
    net.arch = arch;
    net.seed = cfg.seed;
    net.inputs = inputs;
    net.m = data.d_out;
    std::tie(net.lo, net.hi) = target_range(data);
    Dataset d = normalized_inputs(data, inputs);
    for (size_t s = 0; s < d.size(); ++s)
        for (int c = 0; c < d.d_out; ++c) {
            double& y = d.Y[s * d.d_out + c];
            y = 2.0 * (y - net.lo[c]) / (net.hi[c] - net.lo[c]) - 1.0;
        }
    net.plain = deep_mlp(d.d_in, arch.layers, arch.width, d.d_out, cfg.seed, 0);
    net.history.push_back({"plain", train_supervised(net.plain, d, cfg)});
    return net;
}

struct BeaconsTraining {
    TrainConfig head;
    TrainConfig stage;
    int stage_samples = 257;
    int error_grid = 4097;
};

// Sup error of a learned stage against its map on a uniform grid of [-1, 1].
inline double stage_error(const SmoothStage& st, int points) {
    double e = 0.0;
    for (int k = 0; k < points; ++k) {
        double s = -1.0 + 2.0 * k / (points - 1);
        e = std::max(e, std::abs(st.net.forward(&s)[0] - st.map.normalized(s)));
    }
    return e;
}

inline SmoothStage train_stage(const AnalyticMap& map, int width, const BeaconsTraining& bt, uint64_t stream,
                               TrainResult* result = nullptr) {
    map.validate();
    SmoothStage st;
    st.map = map;
    Dataset d;
    d.d_in = d.d_out = 1;
    for (int k = 0; k < bt.stage_samples; ++k) {
        double s = -1.0 + 2.0 * k / (bt.stage_samples - 1), z = map.normalized(s);
        d.add(&s, &z);
    }
    st.net = shallow_mlp(1, width, 1, bt.stage.seed, stream);
    auto r = train_supervised(st.net, d, bt.stage);
    if (result) *result = r;
    st.e_f = stage_error(st, bt.error_grid);
    return st;
}

// maps[c] lists the layers - 1 analytic stages of component c in application order.
inline DeepNet train_beacons(const Dataset& data, const Normalizer& inputs, const ArchitectureSpec& arch,
                             const std::vector<std::vector<AnalyticMap>>& maps, const BeaconsTraining& bt) {
    arch.validate();
    if (arch.kind != ArchKind::beacons) throw std::invalid_argument("train_beacons needs a beacons architecture");
    if (static_cast<int>(maps.size()) != data.d_out) throw std::invalid_argument("one map list per component");
    DeepNet net;
    net.arch = arch;
    net.seed = bt.head.seed;
    net.inputs = inputs;
    net.m = data.d_out;
    std::tie(net.lo, net.hi) = target_range(data);
    const Dataset dn = normalized_inputs(data, inputs);
    uint64_t stream = 1;
    for (int c = 0; c < net.m; ++c) {
        if (static_cast<int>(maps[c].size()) != arch.layers - 1)
            throw std::invalid_argument("beacons chain needs layers - 1 analytic stages");
        BeaconsChain ch;
        ch.lo = net.lo[c];
        ch.hi = net.hi[c];
        for (size_t k = 0; k < maps[c].size(); ++k) {
            TrainResult r;
            ch.stages.push_back(train_stage(maps[c][k], arch.width, bt, stream++, &r));
            net.history.push_back({"c" + std::to_string(c) + ".stage" + std::to_string(k + 1), r});
        }
        Dataset hd;
        hd.d_in = dn.d_in;
        hd.d_out = 1;
        for (size_t s = 0; s < dn.size(); ++s) {
            double z = std::clamp(ch.to_unit(dn.Y[s * dn.d_out + c]), -1.0, 1.0);
            double g = ch.head_target(z);
            if (!std::isfinite(g)) throw std::domain_error("head target outside the inverse map's domain");
            hd.add(&dn.X[s * dn.d_in], &g);
        }
        ch.head = shallow_mlp(dn.d_in, arch.width, 1, bt.head.seed, stream++);
        net.history.push_back({"c" + std::to_string(c) + ".head", train_supervised(ch.head, hd, bt.head)});
        double e = 0.0;
        for (size_t s = 0; s < hd.size(); ++s)
            e = std::max(e, std::abs(ch.head.forward(&hd.X[s * hd.d_in])[0] - hd.Y[s]));
        ch.e_g = e;
        net.chains.push_back(std::move(ch));
    }
    return net;
}

}  // namespace beacons
