// A-priori smoothness analysis by the method of characteristics.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fv.hpp"
#include "initial_data.hpp"
#include "pde.hpp"

namespace beacons {

enum class Classification { smooth_forever, blowup_at, discontinuous_from_start, asymptotically_smooth };

inline std::string to_string(Classification c) {
    switch (c) {
    case Classification::smooth_forever: return "smooth_forever";
    case Classification::blowup_at: return "blowup_at";
    case Classification::discontinuous_from_start: return "discontinuous_from_start";
    case Classification::asymptotically_smooth: return "asymptotically_smooth";
    }
    return "?";
}

inline Classification classification_from_string(const std::string& s) {
    for (auto c : {Classification::smooth_forever, Classification::blowup_at, Classification::discontinuous_from_start,
                   Classification::asymptotically_smooth})
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown classification: " + s);
}

struct SmoothnessOrder {
    int global = 0;       // C^n across the whole domain
    int smooth_part = 0;  // minimum order of the pieces, capped
};

struct SmoothnessReport {
    Classification classification = Classification::smooth_forever;
    int n = kOrderCap;         // smooth-part order, capped
    int n_global = kOrderCap;  // global order, capped
    std::vector<double> t_inf;  // per wave family
    int discontinuity_count = 0;
    bool linear_flux = false;
    std::vector<std::string> notes;
};

constexpr int kSamplesPerPiece = 10000;
constexpr double kInf = std::numeric_limits<double>::infinity();

inline SmoothnessOrder smoothness_order(const InitialData& u0) {
    u0.validate();
    SmoothnessOrder r;
    r.smooth_part = cap_order(u0.min_piece_order());
    if (u0.layout != InitialData::Layout::line) {
        r.global = u0.discontinuity_count() > 0 ? 0 : r.smooth_part;
        return r;
    }
    int g = r.smooth_part;
    for (auto& row : u0.jump_flags()) {
        for (int k = 0; k <= kOrderCap; ++k)
            if (row[k]) {
                g = std::min(g, std::max(k - 1, 0));
                break;
            }
    }
    r.global = g;
    return r;
}

// Calls fn(x, piece) at kSamplesPerPiece uniform points per piece including
// both endpoints (one-sided limits at breakpoints).
template <class Fn> void for_samples(const InitialData& u0, Fn&& fn) {
    for (size_t p = 0; p < u0.pieces.size(); ++p) {
        auto [a, b] = u0.piece_interval(p);
        if (!(b > a)) continue;
        for (int k = 0; k < kSamplesPerPiece; ++k) {
            double x = a + (b - a) * k / (kSamplesPerPiece - 1);
            fn(x, u0.pieces[p]);
        }
    }
}

// 1 / s with 1/0 = +inf; non-positive sup also means no blow-up.
inline double blowup_time_from_sup(double s) { return s > 0.0 ? 1.0 / s : kInf; }

inline SmoothnessReport classify_scalar(const PdeSystem& sys, const InitialData& u0) {
    if (sys.m != 1) throw std::invalid_argument("classify_scalar: system is not scalar");
    u0.validate();
    SmoothnessReport r;
    auto ord = smoothness_order(u0);
    r.n = ord.smooth_part;
    r.n_global = ord.global;
    r.linear_flux = sys.linear();
    r.discontinuity_count = u0.discontinuity_count();
    if (r.discontinuity_count > 0) {
        r.classification = Classification::discontinuous_from_start;
        r.t_inf = {0.0};
        r.notes.push_back("initial data has value jumps; smoothness taken per piece (order " + std::to_string(r.n) +
                          ")");
        if (sys.linear()) r.notes.push_back("case 1: linear flux, jumps are transported unchanged");
        else r.notes.push_back("case 2: nonlinear flux, jumps may steepen into shocks or open rarefactions");
        return r;
    }
    if (u0.layout != InitialData::Layout::line) {
        if (sys.linear()) {
            r.classification = Classification::smooth_forever;
            r.t_inf = {kInf};
            r.notes.push_back("case 1: linear flux");
            return r;
        }
        throw std::invalid_argument("classify_scalar: smooth 2D data needs a line layout");
    }
    if (sys.linear()) {
        r.classification = Classification::smooth_forever;
        r.t_inf = {kInf};
        r.n = r.n_global;
        r.notes.push_back("case 1: linear flux");
        return r;
    }
    double sup = -kInf;
    bool increasing = true, decreasing = true;
    for_samples(u0, [&](double x, const Piece& p) {
        double u = p.d(x, 0)[0], du = p.d(x, 1)[0];
        double fpp = sys.flux_curvature(u);
        increasing = increasing && du >= 0.0;
        decreasing = decreasing && du <= 0.0;
        sup = std::max(sup, -fpp * du);
    });
    r.n = r.n_global;
    if (increasing) {
        r.classification = Classification::smooth_forever;
        r.t_inf = {kInf};
        r.notes.push_back("case 1: convex flux with monotonically increasing data");
        return r;
    }
    double t = blowup_time_from_sup(sup);
    r.t_inf = {t};
    r.classification = std::isinf(t) ? Classification::smooth_forever : Classification::blowup_at;
    r.notes.push_back("case 2: t_inf = 1 / sup(-f''(u0) u0')");
    return r;
}

struct WaveBlowup {
    int wave = 0;
    int alpha_sign = 0;
    double t_inf = kInf;
};

// Genuine-nonlinearity coefficient alpha_i = grad_W lambda_i . (dW/dU r_i),
// evaluated with closed-form primitive-variable gradients.
inline std::vector<double> wave_alphas(const PdeSystem& sys, const State& U, int dir = 0) {
    if (sys.kind != Kind::euler) return {sys.kind == Kind::burgers ? 1.0 : 0.0};
    const int m = sys.m, n = 1 + dir;
    const double g = sys.params.gamma;
    Primitive w = sys.primitive(U);
    double rho = w[0], P = w[3];
    double c = std::sqrt(g * P / rho);
    double un = U[n] / rho;
    auto es = sys.eigen(U, dir);
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) {
        // dW/dU applied to r_i: d rho, d un, d P
        double dr = es.R[0][i];
        double dun = (es.R[n][i] - un * dr) / rho;
        double q2 = 0.0, vdq = 0.0;
        for (int k = 1; k < m - 1; ++k) {
            double vk = U[k] / rho;
            q2 += vk * vk;
            vdq += vk * (es.R[k][i] - vk * dr) / rho;
        }
        double dP = (g - 1.0) * (es.R[m - 1][i] - 0.5 * q2 * dr - rho * vdq);
        // grad of c = sqrt(g P / rho)
        double dc = -c / (2.0 * rho) * dr + c / (2.0 * P) * dP;
        double alpha;
        if (i == 0) alpha = dun - dc;
        else if (i == m - 1) alpha = dun + dc;
        else alpha = dun;  // entropy / shear waves travel at un
        out[i] = alpha;
    }
    return out;
}

inline std::vector<WaveBlowup> wave_blowup_times(const PdeSystem& sys, const InitialData& U0) {
    U0.validate();
    if (U0.layout != InitialData::Layout::line) throw std::invalid_argument("wave_blowup_times: 1D data only");
    const int m = sys.m;
    std::vector<double> sup(m, -kInf);
    std::vector<int> sign(m, 0);
    std::vector<bool> degenerate(m, true);
    for_samples(U0, [&](double x, const Piece& p) {
        State U = p.d(x, 0), dU = p.d(x, 1);
        if (!sys.valid(U)) throw std::domain_error("wave_blowup_times: invalid state in initial data");
        auto alpha = wave_alphas(sys, U);
        auto es = sys.eigen(U, 0);
        for (int i = 0; i < m; ++i) {
            double scale = sys.kind == Kind::euler ? sys.sound_speed(U) / U[0] : 1.0;
            if (std::abs(alpha[i]) > 1e-12 * (1.0 + scale)) {
                degenerate[i] = false;
                if (sign[i] == 0) sign[i] = alpha[i] > 0 ? 1 : -1;
            } else {
                alpha[i] = 0.0;
            }
            double omega = 0.0;
            for (int k = 0; k < m; ++k) omega += es.L[i][k] * dU[k];
            sup[i] = std::max(sup[i], -alpha[i] * omega);
        }
    });
    std::vector<WaveBlowup> out;
    for (int i = 0; i < m; ++i)
        out.push_back({i, sign[i], degenerate[i] ? kInf : blowup_time_from_sup(sup[i])});
    return out;
}

inline SmoothnessReport classify_system(const PdeSystem& sys, const InitialData& U0) {
    if (sys.m == 1) return classify_scalar(sys, U0);
    U0.validate();
    SmoothnessReport r;
    auto ord = smoothness_order(U0);
    r.n = ord.smooth_part;
    r.n_global = ord.global;
    r.discontinuity_count = U0.discontinuity_count();
    if (r.discontinuity_count > 0) {
        r.classification = Classification::discontinuous_from_start;
        r.t_inf.assign(sys.m, 0.0);
        r.notes.push_back("initial data has value jumps; smoothness taken per piece (order " + std::to_string(r.n) +
                          ")");
        return r;
    }
    r.n = r.n_global;
    auto waves = wave_blowup_times(sys, U0);
    r.classification = Classification::smooth_forever;
    for (auto& w : waves) {
        r.t_inf.push_back(w.t_inf);
        if (std::isfinite(w.t_inf)) r.classification = Classification::blowup_at;
    }
    r.notes.push_back("per-wave t_inf = 1 / sup(-alpha_i omega_i)");
    return r;
}

// Largest 4-cell jump of the first component over both axes: a
// resolution-robust proxy for the strongest discontinuity amplitude.
inline double jump_amplitude(const StateField& f) {
    double a = 0.0;
    for (int j = 0; j < f.ny(); ++j)
        for (int i = 0; i + 4 < f.nx(); ++i) a = std::max(a, std::abs(f.at(i + 4, j)[0] - f.at(i, j)[0]));
    if (f.grid.dim == 2)
        for (int i = 0; i < f.nx(); ++i)
            for (int j = 0; j + 4 < f.ny(); ++j) a = std::max(a, std::abs(f.at(i, j + 4)[0] - f.at(i, j)[0]));
    return a;
}

// Upgrades discontinuous_from_start to asymptotically_smooth. Requires every
// jump-carrying wave to be genuinely nonlinear, and then either a bounded 2D
// jump set (a compact disturbance whose shocks are all backed by the
// rarefaction emitted from the same region) or a measured decay of the
// strongest jump over the solver run.
inline void detect_asymptotic_smoothing(SmoothnessReport& r, const PdeSystem& sys, const InitialData& u0,
                                        const FrameSeries* frames = nullptr, double decay_ratio = 0.9) {
    if (r.classification != Classification::discontinuous_from_start) return;
    if (sys.kind != Kind::burgers) {
        r.notes.push_back(sys.kind == Kind::advection
                              ? "linearly degenerate flux: jumps persist"
                              : "contact/shear waves are linearly degenerate: jumps persist");
        return;
    }
    if (u0.layout == InitialData::Layout::disk) {
        r.classification = Classification::asymptotically_smooth;
        r.notes.push_back("bounded 2D jump set under a convex flux: shocks damp to zero as t -> inf; "
                          "discontinuity set is asymptotically empty");
        return;
    }
    if (frames && frames->frames.size() >= 3) {
        double first = jump_amplitude(frames->frames[1]);
        double last = jump_amplitude(frames->frames.back());
        if (first > 0.0 && last < decay_ratio * first) {
            r.classification = Classification::asymptotically_smooth;
            r.notes.push_back("shock amplitude decays along the run (" + std::to_string(first) + " -> " +
                              std::to_string(last) + "); discontinuity set is asymptotically empty");
            return;
        }
    }
    r.notes.push_back("shock amplitude does not decay over the run");
}

}  // namespace beacons
