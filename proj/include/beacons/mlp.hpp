// Dense tanh networks. A shallow net is one hidden layer plus a linear
// output; plain baselines stack more hidden layers of the same kind.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace beacons {

// Per-axis affine map of (t, x[, y]) onto [-1, 1].
struct Normalizer {
    int dims = 0;
    std::array<double, 3> lo{}, hi{};

    static Normalizer box(std::vector<std::pair<double, double>> axes) {
        Normalizer n;
        n.dims = static_cast<int>(axes.size());
        if (n.dims < 1 || n.dims > 3) throw std::invalid_argument("normalizer: 1 to 3 axes");
        for (int k = 0; k < n.dims; ++k) {
            n.lo[k] = axes[k].first;
            n.hi[k] = axes[k].second;
            if (!(n.hi[k] > n.lo[k])) throw std::invalid_argument("normalizer: empty axis");
        }
        return n;
    }

    double scale(int k) const { return 2.0 / (hi[k] - lo[k]); }
    void apply(const double* p, double* out) const {
        for (int k = 0; k < dims; ++k) out[k] = (p[k] - lo[k]) * scale(k) - 1.0;
    }
};

struct Layer {
    int in = 0, out = 0;
    bool tanh = true;
    std::vector<double> W;  // out x in, row-major
    std::vector<double> b;
};

struct Mlp {
    std::vector<Layer> layers;

    int d_in() const { return layers.front().in; }
    int d_out() const { return layers.back().out; }
    int hidden_layers() const { return static_cast<int>(layers.size()) - 1; }
    int width() const { return layers.front().out; }

    size_t param_count() const {
        size_t p = 0;
        for (auto& l : layers) p += l.W.size() + l.b.size();
        return p;
    }

    // Flat layout: [W1, b1, W2, b2, ...].
    std::vector<double> params() const {
        std::vector<double> p;
        p.reserve(param_count());
        for (auto& l : layers) {
            p.insert(p.end(), l.W.begin(), l.W.end());
            p.insert(p.end(), l.b.begin(), l.b.end());
        }
        return p;
    }

    void set_params(const std::vector<double>& p) {
        if (p.size() != param_count()) throw std::invalid_argument("parameter count mismatch");
        size_t k = 0;
        for (auto& l : layers) {
            for (auto& w : l.W) w = p[k++];
            for (auto& v : l.b) v = p[k++];
        }
    }

    void validate() const {
        if (layers.empty()) throw std::invalid_argument("empty network");
        for (size_t k = 0; k < layers.size(); ++k) {
            auto& l = layers[k];
            if (l.in < 1 || l.out < 1 || l.W.size() != static_cast<size_t>(l.in) * l.out ||
                l.b.size() != static_cast<size_t>(l.out))
                throw std::invalid_argument("layer shape mismatch");
            if (k > 0 && layers[k - 1].out != l.in) throw std::invalid_argument("adjacent layer dims differ");
            if (l.tanh != (k + 1 < layers.size())) throw std::invalid_argument("only hidden layers use tanh");
        }
    }

    bool finite() const {
        for (auto& l : layers) {
            for (double w : l.W)
                if (!std::isfinite(w)) return false;
            for (double v : l.b)
                if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::vector<double> forward(const double* x) const {
        std::vector<double> h(x, x + d_in()), z;
        for (auto& l : layers) {
            z.assign(l.b.begin(), l.b.end());
            for (int o = 0; o < l.out; ++o)
                for (int i = 0; i < l.in; ++i) z[o] += l.W[o * l.in + i] * h[i];
            if (l.tanh)
                for (auto& v : z) v = std::tanh(v);
            h.swap(z);
        }
        return h;
    }
    std::vector<double> forward(const std::vector<double>& x) const { return forward(x.data()); }

    // d_out x d_in, row-major.
    std::vector<double> input_jacobian(const double* x) const {
        const int n = d_in();
        std::vector<double> h(x, x + n), z;
        std::vector<double> J(static_cast<size_t>(n) * n, 0.0), Jz;  // rows: units, cols: inputs
        for (int i = 0; i < n; ++i) J[i * n + i] = 1.0;
        for (auto& l : layers) {
            z.assign(l.b.begin(), l.b.end());
            Jz.assign(static_cast<size_t>(l.out) * n, 0.0);
            for (int o = 0; o < l.out; ++o)
                for (int i = 0; i < l.in; ++i) {
                    double w = l.W[o * l.in + i];
                    z[o] += w * h[i];
                    for (int j = 0; j < n; ++j) Jz[o * n + j] += w * J[i * n + j];
                }
            if (l.tanh)
                for (int o = 0; o < l.out; ++o) {
                    z[o] = std::tanh(z[o]);
                    double s = 1.0 - z[o] * z[o];
                    for (int j = 0; j < n; ++j) Jz[o * n + j] *= s;
                }
            h.swap(z);
            J.swap(Jz);
        }
        return J;
    }
    std::vector<double> input_jacobian(const std::vector<double>& x) const { return input_jacobian(x.data()); }

    // Largest |output| any input can produce: |tanh| <= 1 before the last layer.
    double output_bound() const {
        if (layers.size() < 2) throw std::logic_error("output bound needs a hidden layer");
        auto& l = layers.back();
        double m = 0.0;
        for (int o = 0; o < l.out; ++o) {
            double s = std::abs(l.b[o]);
            for (int i = 0; i < l.in; ++i) s += std::abs(l.W[o * l.in + i]);
            m = std::max(m, s);
        }
        return m;
    }
};

// Uniform in +-1/sqrt(fan_in); `stream` separates nets sharing a seed.
inline Mlp make_mlp(const std::vector<int>& sizes, uint64_t seed, uint64_t stream = 0) {
    if (sizes.size() < 2) throw std::invalid_argument("need input and output sizes");
    CounterRng rng(seed, stream);
    Mlp net;
    for (size_t k = 0; k + 1 < sizes.size(); ++k) {
        Layer l;
        l.in = sizes[k];
        l.out = sizes[k + 1];
        if (l.in < 1 || l.out < 1) throw std::invalid_argument("layer sizes must be positive");
        l.tanh = k + 2 < sizes.size();
        const double lim = 1.0 / std::sqrt(static_cast<double>(l.in));
        l.W.resize(static_cast<size_t>(l.in) * l.out);
        l.b.resize(l.out);
        for (auto& w : l.W) w = rng.uniform(-lim, lim);
        for (auto& v : l.b) v = rng.uniform(-lim, lim);
        net.layers.push_back(std::move(l));
    }
    return net;
}

inline Mlp shallow_mlp(int d_in, int N, int d_out, uint64_t seed, uint64_t stream = 0) {
    return make_mlp({d_in, N, d_out}, seed, stream);
}

inline Mlp deep_mlp(int d_in, int hidden, int width, int d_out, uint64_t seed, uint64_t stream = 0) {
    std::vector<int> s{d_in};
    for (int k = 0; k < hidden; ++k) s.push_back(width);
    s.push_back(d_out);
    return make_mlp(s, seed, stream);
}

}  // namespace beacons
