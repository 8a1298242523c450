// Least-squares losses and exact gradients over the flat parameter vector.
#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mlp.hpp"
#include "pde.hpp"

namespace beacons {

struct Dataset {
    int d_in = 0, d_out = 0;
    std::vector<double> X;  // n x d_in
    std::vector<double> Y;  // n x d_out

    size_t size() const { return d_in ? X.size() / d_in : 0; }
    void add(const double* x, const double* y) {
        X.insert(X.end(), x, x + d_in);
        Y.insert(Y.end(), y, y + d_out);
    }
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

// Symmetric and positive semi-definite, via an LDL^T sweep with a
// relative tolerance on vanishing pivots.
inline void require_psd(const std::vector<double>& W, int m) {
    if (W.size() != static_cast<size_t>(m) * m) throw std::invalid_argument("weight matrix shape");
    double scale = 0.0;
    for (double w : W) scale = std::max(scale, std::abs(w));
    const double tol = 1e-12 * (1.0 + scale);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(W[i * m + j] - W[j * m + i]) > tol) throw std::invalid_argument("weight matrix not symmetric");
    std::vector<double> A = W;
    for (int k = 0; k < m; ++k) {
        double d = A[k * m + k];
        if (d < -tol) throw std::invalid_argument("weight matrix not positive semi-definite");
        if (d <= tol) {
            for (int i = k + 1; i < m; ++i)
                if (std::abs(A[i * m + k]) > tol) throw std::invalid_argument("weight matrix not positive semi-definite");
            continue;
        }
        for (int i = k + 1; i < m; ++i)
            for (int j = k + 1; j < m; ++j) A[i * m + j] -= A[i * m + k] * A[k * m + j] / d;
    }
}

inline int thread_count() {
    if (const char* s = std::getenv("BEACONS_THREADS")) {
        int n = std::atoi(s);
        if (n >= 1) return n;
    }
    return 1;
}

namespace detail {

constexpr size_t kChunk = 512;

inline std::vector<std::vector<double>> transposed_weights(const Mlp& net) {
    std::vector<std::vector<double>> WT;
    for (auto& l : net.layers) {
        std::vector<double> t(l.W.size());
        for (int o = 0; o < l.out; ++o)
            for (int i = 0; i < l.in; ++i) t[i * l.out + o] = l.W[o * l.in + i];
        WT.push_back(std::move(t));
    }
    return WT;
}

// Batched forward: H[0] = inputs, H[k+1] = output of layer k.
inline void forward_batch(const Mlp& net, const std::vector<std::vector<double>>& WT, const double* X, size_t n,
                          std::vector<std::vector<double>>& H) {
    H.resize(net.layers.size() + 1);
    H[0].assign(X, X + n * net.d_in());
    for (size_t k = 0; k < net.layers.size(); ++k) {
        auto& l = net.layers[k];
        H[k + 1].resize(n * l.out);
        for (size_t s = 0; s < n; ++s) {
            double* z = &H[k + 1][s * l.out];
            const double* h = &H[k][s * l.in];
            for (int o = 0; o < l.out; ++o) z[o] = l.b[o];
            for (int i = 0; i < l.in; ++i) {
                const double hi = h[i];
                const double* wt = &WT[k][i * l.out];
                for (int o = 0; o < l.out; ++o) z[o] += wt[o] * hi;
            }
            if (l.tanh)
                for (int o = 0; o < l.out; ++o) z[o] = std::tanh(z[o]);
        }
    }
}

// G holds dL/d(output) on entry; accumulates dL/dtheta into grad.
inline void backward_batch(const Mlp& net, size_t n, const std::vector<std::vector<double>>& H, std::vector<double> G,
                           double* grad) {
    std::vector<size_t> offset(net.layers.size());
    size_t p = 0;
    for (size_t k = 0; k < net.layers.size(); ++k) {
        offset[k] = p;
        p += net.layers[k].W.size() + net.layers[k].b.size();
    }
    std::vector<double> GH;
    for (size_t k = net.layers.size(); k-- > 0;) {
        auto& l = net.layers[k];
        double* gW = grad + offset[k];
        double* gb = gW + l.W.size();
        for (size_t s = 0; s < n; ++s) {
            const double* g = &G[s * l.out];
            const double* h = &H[k][s * l.in];
            for (int o = 0; o < l.out; ++o) {
                const double go = g[o];
                gb[o] += go;
                double* row = gW + o * l.in;
                for (int i = 0; i < l.in; ++i) row[i] += go * h[i];
            }
        }
        if (k == 0) break;
        GH.assign(n * l.in, 0.0);
        for (size_t s = 0; s < n; ++s) {
            const double* g = &G[s * l.out];
            double* gh = &GH[s * l.in];
            for (int o = 0; o < l.out; ++o) {
                const double go = g[o];
                const double* w = &l.W[o * l.in];
                for (int i = 0; i < l.in; ++i) gh[i] += go * w[i];
            }
            const double* h = &H[k][s * l.in];
            for (int i = 0; i < l.in; ++i) gh[i] *= 1.0 - h[i] * h[i];
        }
        G.swap(GH);
    }
}

// Runs fn(chunk_index) over all chunks; results are combined by the caller
// in chunk order, so the thread count never changes the arithmetic.
template <class Fn> void for_chunks(size_t chunks, Fn&& fn) {
    const int T = std::min<int>(thread_count(), static_cast<int>(chunks));
    if (T <= 1) {
        for (size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t)
        pool.emplace_back([&, t] {
            for (size_t c = t; c < chunks; c += T) fn(c);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Mean weighted squared residual (1/n) sum r^T W r with r = net(x) - y.
inline LossGrad loss_and_grad_supervised(const Mlp& net, const Dataset& data, const std::vector<double>* W = nullptr) {
    net.validate();
    const int m = net.d_out();
    if (data.d_in != net.d_in() || data.d_out != m) throw std::invalid_argument("dataset and network dims differ");
    const size_t n = data.size();
    if (n == 0 || data.Y.size() != n * m) throw std::invalid_argument("empty or ragged dataset");
    if (W) require_psd(*W, m);
    const auto WT = detail::transposed_weights(net);
    const size_t P = net.param_count();
    const size_t chunks = (n + detail::kChunk - 1) / detail::kChunk;
    std::vector<double> part_loss(chunks, 0.0);
    std::vector<std::vector<double>> part_grad(chunks);
    detail::for_chunks(chunks, [&](size_t c) {
        const size_t s0 = c * detail::kChunk, s1 = std::min(n, s0 + detail::kChunk), len = s1 - s0;
        std::vector<std::vector<double>> H;
        detail::forward_batch(net, WT, &data.X[s0 * data.d_in], len, H);
        std::vector<double> G(len * m), r(m);
        double L = 0.0;
        for (size_t s = 0; s < len; ++s) {
            const double* u = &H.back()[s * m];
            const double* y = &data.Y[(s0 + s) * m];
            for (int a = 0; a < m; ++a) r[a] = u[a] - y[a];
            for (int a = 0; a < m; ++a) {
                double wr = W ? 0.0 : r[a];
                if (W)
                    for (int b = 0; b < m; ++b) wr += (*W)[a * m + b] * r[b];
                L += r[a] * wr;
                G[s * m + a] = 2.0 * wr;
            }
        }
        part_loss[c] = L;
        part_grad[c].assign(P, 0.0);
        detail::backward_batch(net, len, H, std::move(G), part_grad[c].data());
    });
    LossGrad out;
    out.grad.assign(P, 0.0);
    for (size_t c = 0; c < chunks; ++c) {
        out.loss += part_loss[c];
        for (size_t p = 0; p < P; ++p) out.grad[p] += part_grad[c][p];
    }
    const double inv = 1.0 / static_cast<double>(n);
    out.loss *= inv;
    for (auto& g : out.grad) g *= inv;
    return out;
}

// Forward-mode scalar for differentiating the flux Jacobian in u.
struct Dual {
    double v = 0.0, d = 0.0;
    Dual() = default;
    Dual(double x) : v(x) {}
    Dual(double x, double dx) : v(x), d(dx) {}
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }

struct ResidualProblem {
    const PdeSystem* sys = nullptr;
    Normalizer inputs;                // physical (t, x[, y]) -> network input
    std::vector<double> interior;     // n_int x (1 + dim), physical coordinates
    std::vector<double> boundary;     // n_bc x (1 + dim)
    std::vector<double> boundary_u;   // n_bc x m, Dirichlet values
    double lambda_pde = 1.0, lambda_bc = 1.0;
};

namespace detail {

// One sample with tangents along every network input. T[k] is (width x nin)
// of d(layer output)/d(input); Zt keeps pre-activation tangents.
struct TangentTape {
    std::vector<std::vector<double>> H, T, Zt;
};

inline void forward_tangent(const Mlp& net, const double* x, TangentTape& tp) {
    const int nin = net.d_in();
    const size_t L = net.layers.size();
    tp.H.assign(L + 1, {});
    tp.T.assign(L + 1, {});
    tp.Zt.assign(L + 1, {});
    tp.H[0].assign(x, x + nin);
    tp.T[0].assign(static_cast<size_t>(nin) * nin, 0.0);
    for (int i = 0; i < nin; ++i) tp.T[0][i * nin + i] = 1.0;
    for (size_t k = 0; k < L; ++k) {
        auto& l = net.layers[k];
        auto& h = tp.H[k];
        auto& t = tp.T[k];
        std::vector<double> z(l.b), zt(static_cast<size_t>(l.out) * nin, 0.0);
        for (int o = 0; o < l.out; ++o)
            for (int i = 0; i < l.in; ++i) {
                const double w = l.W[o * l.in + i];
                z[o] += w * h[i];
                for (int j = 0; j < nin; ++j) zt[o * nin + j] += w * t[i * nin + j];
            }
        tp.Zt[k + 1] = zt;
        if (l.tanh)
            for (int o = 0; o < l.out; ++o) {
                z[o] = std::tanh(z[o]);
                const double s = 1.0 - z[o] * z[o];
                for (int j = 0; j < nin; ++j) zt[o * nin + j] *= s;
            }
        tp.H[k + 1] = std::move(z);
        tp.T[k + 1] = std::move(zt);
    }
}

// gu = dL/du, gut = dL/du_dot (m x nin); accumulates dL/dtheta into grad.
inline void backward_tangent(const Mlp& net, const TangentTape& tp, std::vector<double> gz, std::vector<double> gzt,
                             double* grad) {
    const int nin = net.d_in();
    std::vector<size_t> offset(net.layers.size());
    size_t p = 0;
    for (size_t k = 0; k < net.layers.size(); ++k) {
        offset[k] = p;
        p += net.layers[k].W.size() + net.layers[k].b.size();
    }
    for (size_t k = net.layers.size(); k-- > 0;) {
        auto& l = net.layers[k];
        // gz, gzt are gradients w.r.t. this layer's pre-activation output.
        const auto& h = tp.H[k];
        const auto& t = tp.T[k];
        double* gW = grad + offset[k];
        double* gb = gW + l.W.size();
        for (int o = 0; o < l.out; ++o) {
            gb[o] += gz[o];
            for (int i = 0; i < l.in; ++i) {
                double s = gz[o] * h[i];
                for (int j = 0; j < nin; ++j) s += gzt[o * nin + j] * t[i * nin + j];
                gW[o * l.in + i] += s;
            }
        }
        if (k == 0) break;
        std::vector<double> gh(l.in, 0.0), ght(static_cast<size_t>(l.in) * nin, 0.0);
        for (int o = 0; o < l.out; ++o)
            for (int i = 0; i < l.in; ++i) {
                const double w = l.W[o * l.in + i];
                gh[i] += gz[o] * w;
                for (int j = 0; j < nin; ++j) ght[i * nin + j] += gzt[o * nin + j] * w;
            }
        // Through the previous layer's tanh: h = tanh(z), h_dot = s z_dot, s = 1 - h^2.
        const auto& zt = tp.Zt[k];
        gz.assign(l.in, 0.0);
        gzt.assign(static_cast<size_t>(l.in) * nin, 0.0);
        for (int i = 0; i < l.in; ++i) {
            const double s = 1.0 - h[i] * h[i], ds = -2.0 * h[i] * s;
            double g = gh[i] * s;
            for (int j = 0; j < nin; ++j) {
                g += ght[i * nin + j] * zt[i * nin + j] * ds;
                gzt[i * nin + j] = ght[i * nin + j] * s;
            }
            gz[i] = g;
        }
    }
}

}  // namespace detail

// lambda_pde (1/N_int) sum r^T W r + lambda_bc (1/N_bc) sum (u - u_b)^T W (u - u_b),
// r = u_t + sum_d A_d(u) u_{x_d}.
inline LossGrad loss_and_grad_residual(const Mlp& net, const ResidualProblem& pb,
                                       const std::vector<double>* W = nullptr) {
    net.validate();
    if (!pb.sys) throw std::invalid_argument("residual needs a system");
    const PdeSystem& sys = *pb.sys;
    const int m = sys.m, nin = 1 + sys.dim;
    if (net.d_in() != nin || net.d_out() != m || pb.inputs.dims != nin)
        throw std::invalid_argument("network dims do not match the system");
    if (W) require_psd(*W, m);
    const size_t n_int = pb.interior.size() / nin, n_bc = pb.boundary.size() / nin;
    if (pb.boundary_u.size() != n_bc * m) throw std::invalid_argument("boundary values shape");
    auto Wm = [&](int a, int b) { return W ? (*W)[a * m + b] : (a == b ? 1.0 : 0.0); };

    LossGrad out;
    out.grad.assign(net.param_count(), 0.0);
    std::vector<double> xn(nin);
    detail::TangentTape tp;
    double J_pde = 0.0, J_bc = 0.0;
    std::vector<double> gpde(net.param_count(), 0.0), gbc(net.param_count(), 0.0);

    for (size_t s = 0; s < n_int; ++s) {
        pb.inputs.apply(&pb.interior[s * nin], xn.data());
        detail::forward_tangent(net, xn.data(), tp);
        const auto& u = tp.H.back();
        const auto& ut = tp.T.back();  // m x nin, w.r.t. normalized inputs
        Vec<double> U{};
        for (int c = 0; c < m; ++c) U[c] = u[c];
        std::vector<Mat<double>> A(sys.dim);
        for (int d = 0; d < sys.dim; ++d) A[d] = sys.jacobian(U, d);
        std::vector<double> r(m, 0.0);
        for (int k = 0; k < m; ++k) {
            r[k] = pb.inputs.scale(0) * ut[k * nin + 0];
            for (int d = 0; d < sys.dim; ++d)
                for (int c = 0; c < m; ++c) r[k] += pb.inputs.scale(1 + d) * A[d][k][c] * ut[c * nin + 1 + d];
        }
        std::vector<double> wr(m, 0.0);
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) wr[a] += Wm(a, b) * r[b];
            J_pde += r[a] * wr[a];
        }
        // dL/dr = 2 W r; chain into u_dot directly and into u through dA/du.
        std::vector<double> gu(m, 0.0), gut(static_cast<size_t>(m) * nin, 0.0);
        for (int c = 0; c < m; ++c) {
            gut[c * nin + 0] = 2.0 * wr[c] * pb.inputs.scale(0);
            for (int d = 0; d < sys.dim; ++d) {
                double g = 0.0;
                for (int k = 0; k < m; ++k) g += 2.0 * wr[k] * A[d][k][c];
                gut[c * nin + 1 + d] = g * pb.inputs.scale(1 + d);
            }
        }
        for (int c = 0; c < m; ++c) {
            Vec<Dual> Ud{};
            for (int e = 0; e < m; ++e) Ud[e] = Dual(U[e], e == c ? 1.0 : 0.0);
            for (int d = 0; d < sys.dim; ++d) {
                auto Ad = sys.jacobian(Ud, d);
                for (int k = 0; k < m; ++k)
                    for (int e = 0; e < m; ++e)
                        gu[c] += 2.0 * wr[k] * pb.inputs.scale(1 + d) * Ad[k][e].d * ut[e * nin + 1 + d];
            }
        }
        detail::backward_tangent(net, tp, gu, gut, gpde.data());
    }
    for (size_t s = 0; s < n_bc; ++s) {
        pb.inputs.apply(&pb.boundary[s * nin], xn.data());
        detail::forward_tangent(net, xn.data(), tp);
        const auto& u = tp.H.back();
        std::vector<double> r(m), gu(m, 0.0), gut(static_cast<size_t>(m) * nin, 0.0);
        for (int c = 0; c < m; ++c) r[c] = u[c] - pb.boundary_u[s * m + c];
        for (int a = 0; a < m; ++a) {
            double w = 0.0;
            for (int b = 0; b < m; ++b) w += Wm(a, b) * r[b];
            J_bc += r[a] * w;
            gu[a] = 2.0 * w;
        }
        detail::backward_tangent(net, tp, gu, gut, gbc.data());
    }
    const double ci = n_int ? pb.lambda_pde / static_cast<double>(n_int) : 0.0;
    const double cb = n_bc ? pb.lambda_bc / static_cast<double>(n_bc) : 0.0;
    out.loss = ci * J_pde + cb * J_bc;
    for (size_t p = 0; p < out.grad.size(); ++p) out.grad[p] = ci * gpde[p] + cb * gbc[p];
    return out;
}

}  // namespace beacons
