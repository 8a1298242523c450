// Registered hyperbolic systems: advection, Burgers and Euler in one and two
// space dimensions.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace beacons {

template <class T> using Vec = std::array<T, 4>;
template <class T> using Mat = std::array<std::array<T, 4>, 4>;
using State = Vec<double>;

enum class Kind { advection, burgers, euler };

struct Params {
    double a = 1.0;
    double gamma = 1.4;
};

struct Eigensystem {
    std::array<double, 4> lambda{};  // ascending
    Mat<double> R{};                 // columns are right eigenvectors
    Mat<double> L{};                 // rows are left eigenvectors
};

// (rho, u, v, P) for Euler; w[0] = u for scalars.
using Primitive = std::array<double, 4>;

class PdeSystem {
public:
    std::string name;
    Kind kind = Kind::advection;
    int m = 1;
    int dim = 1;
    Params params;

    int energy_index() const { return m - 1; }

    template <class T> T pressure(const Vec<T>& U) const {
        T q2 = U[1] * U[1];
        if (dim == 2) q2 = q2 + U[2] * U[2];
        return (U[m - 1] - T(0.5) * q2 / U[0]) * T(params.gamma - 1.0);
    }

    template <class T> Vec<T> flux(const Vec<T>& U, int dir) const {
        Vec<T> F{};
        switch (kind) {
        case Kind::advection: F[0] = T(params.a) * U[0]; break;
        case Kind::burgers: F[0] = T(0.5) * U[0] * U[0]; break;
        case Kind::euler: {
            const int n = 1 + dir, e = m - 1;
            T un = U[n] / U[0];
            T P = pressure(U);
            F[0] = U[n];
            F[n] = U[n] * un + P;
            if (dim == 2) {
                const int tt = 2 - dir;
                F[tt] = U[tt] * un;
            }
            F[e] = (U[e] + P) * un;
            break;
        }
        }
        return F;
    }

    template <class T> Mat<T> jacobian(const Vec<T>& U, int dir) const {
        Mat<T> A{};
        for (auto& r : A) r.fill(T(0));
        switch (kind) {
        case Kind::advection: A[0][0] = T(params.a); break;
        case Kind::burgers: A[0][0] = U[0]; break;
        case Kind::euler: {
            const double g = params.gamma, g1 = g - 1.0;
            const int n = 1 + dir, e = m - 1;
            T un = U[n] / U[0];
            T ut = T(0);
            if (dim == 2) ut = U[2 - dir] / U[0];
            T q2 = un * un + ut * ut;
            T H = (U[e] + pressure(U)) / U[0];
            A[0][n] = T(1);
            A[n][0] = T(0.5 * g1) * q2 - un * un;
            A[n][n] = T(3.0 - g) * un;
            A[n][e] = T(g1);
            A[e][0] = un * (T(0.5 * g1) * q2 - H);
            A[e][n] = H - T(g1) * un * un;
            A[e][e] = T(g) * un;
            if (dim == 2) {
                const int tt = 2 - dir;
                A[n][tt] = -T(g1) * ut;
                A[tt][0] = -un * ut;
                A[tt][n] = ut;
                A[tt][tt] = un;
                A[e][tt] = -T(g1) * un * ut;
            }
            break;
        }
        }
        return A;
    }

    // Eigenstructure of the Euler Jacobian from (normal velocity, tangential
    // velocity, enthalpy); shared by eigen() and the Roe average.
    Eigensystem euler_eigen(double un, double ut, double H, double c, int dir) const {
        const double g1 = params.gamma - 1.0;
        const int n = 1 + dir, e = m - 1;
        const int tt = dim == 2 ? 2 - dir : -1;
        const double q2 = un * un + ut * ut;
        const double b1 = g1 / (c * c), b2 = 0.5 * b1 * q2;
        Eigensystem es;
        for (auto& r : es.R) r.fill(0.0);
        for (auto& r : es.L) r.fill(0.0);
        // wave order: acoustic-, entropy, [shear], acoustic+
        const int last = m - 1;
        es.lambda = {0, 0, 0, 0};
        es.lambda[0] = un - c;
        es.lambda[1] = un;
        if (dim == 2) es.lambda[2] = un;
        es.lambda[last] = un + c;

        auto setR = [&](int k, double r0, double rn, double rt, double re) {
            es.R[0][k] = r0;
            es.R[n][k] = rn;
            if (tt >= 0) es.R[tt][k] = rt;
            es.R[e][k] = re;
        };
        auto setL = [&](int k, double l0, double ln, double lt, double le) {
            es.L[k][0] = l0;
            es.L[k][n] = ln;
            if (tt >= 0) es.L[k][tt] = lt;
            es.L[k][e] = le;
        };
        setR(0, 1.0, un - c, ut, H - un * c);
        setR(1, 1.0, un, ut, 0.5 * q2);
        setR(last, 1.0, un + c, ut, H + un * c);
        setL(0, 0.5 * (b2 + un / c), 0.5 * (-b1 * un - 1.0 / c), -0.5 * b1 * ut, 0.5 * b1);
        setL(1, 1.0 - b2, b1 * un, b1 * ut, -b1);
        setL(last, 0.5 * (b2 - un / c), 0.5 * (-b1 * un + 1.0 / c), -0.5 * b1 * ut, 0.5 * b1);
        if (dim == 2) {
            setR(2, 0.0, 0.0, 1.0, ut);
            setL(2, -ut, 0.0, 1.0, 0.0);
        }
        return es;
    }

    Eigensystem eigen(const State& U, int dir) const {
        if (!valid(U)) throw std::domain_error("eigen: invalid state");
        if (kind != Kind::euler) {
            Eigensystem es;
            for (auto& r : es.R) r.fill(0.0);
            for (auto& r : es.L) r.fill(0.0);
            es.lambda[0] = kind == Kind::advection ? params.a : U[0];
            es.R[0][0] = 1.0;
            es.L[0][0] = 1.0;
            return es;
        }
        const int n = 1 + dir;
        double un = U[n] / U[0];
        double ut = dim == 2 ? U[2 - dir] / U[0] : 0.0;
        double P = pressure(U);
        double H = (U[m - 1] + P) / U[0];
        double c = std::sqrt(params.gamma * P / U[0]);
        return euler_eigen(un, ut, H, c, dir);
    }

    bool valid(const State& U) const {
        for (int k = 0; k < m; ++k)
            if (!std::isfinite(U[k])) return false;
        if (kind != Kind::euler) return true;
        return U[0] > 0.0 && pressure(U) > 0.0;
    }

    Primitive primitive(const State& U) const {
        if (kind != Kind::euler) return {U[0], 0, 0, 0};
        if (!valid(U)) throw std::domain_error("primitive: non-positive density or pressure");
        Primitive w{U[0], U[1] / U[0], 0.0, pressure(U)};
        if (dim == 2) w[2] = U[2] / U[0];
        return w;
    }

    State conserved(const Primitive& w) const {
        if (kind != Kind::euler) return {w[0], 0, 0, 0};
        State U{};
        U[0] = w[0];
        U[1] = w[0] * w[1];
        double q2 = w[1] * w[1];
        if (dim == 2) {
            U[2] = w[0] * w[2];
            q2 += w[2] * w[2];
        }
        U[m - 1] = w[3] / (params.gamma - 1.0) + 0.5 * w[0] * q2;
        return U;
    }

    double sound_speed(const State& U) const {
        return std::sqrt(params.gamma * pressure(U) / U[0]);
    }

    double max_wave_speed(const State& U, int dir) const {
        if (!valid(U)) throw std::domain_error("max_wave_speed: invalid state");
        switch (kind) {
        case Kind::advection: return std::abs(params.a);
        case Kind::burgers: return std::abs(U[0]);
        case Kind::euler: return std::abs(U[1 + dir] / U[0]) + sound_speed(U);
        }
        return 0.0;
    }

    // f''(u) for scalar systems.
    double flux_curvature(double) const { return kind == Kind::burgers ? 1.0 : 0.0; }
    bool linear() const { return kind == Kind::advection; }

    std::vector<std::string> component_names() const {
        if (kind != Kind::euler) return {"u"};
        if (dim == 1) return {"rho", "mom_x", "energy"};
        return {"rho", "mom_x", "mom_y", "energy"};
    }
};

inline const std::vector<std::string>& system_names() {
    static const std::vector<std::string> names = {"advection1d", "advection2d", "burgers1d",
                                                   "burgers2d",   "euler1d",     "euler2d"};
    return names;
}

inline PdeSystem make_system(const std::string& name, Params params = {}) {
    PdeSystem s;
    s.name = name;
    s.params = params;
    if (name == "advection1d" || name == "advection2d") s.kind = Kind::advection;
    else if (name == "burgers1d" || name == "burgers2d") s.kind = Kind::burgers;
    else if (name == "euler1d" || name == "euler2d") s.kind = Kind::euler;
    else throw std::invalid_argument("unknown system: " + name);
    s.dim = name.back() == 'd' && name[name.size() - 2] == '2' ? 2 : 1;
    if (s.kind == Kind::euler) {
        if (!(params.gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
        s.m = s.dim == 1 ? 3 : 4;
    }
    if (!std::isfinite(params.a)) throw std::invalid_argument("advection speed must be finite");
    return s;
}

}  // namespace beacons
