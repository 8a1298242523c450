// Symbolic models of the solver's fluxes and limiters, and the certificates
// proved about them.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "checker.hpp"
#include "fv.hpp"
#include "pde.hpp"
#include "proof.hpp"

namespace beacons {

namespace symbolic {

using namespace sym;

inline Expr S(const std::string& s) { return symbol(s); }
inline Expr N(int64_t p, int64_t q = 1) { return num(p, q); }

// Closest small-denominator rational; throws if the parameter is not one.
inline Rational to_rational(double x) {
    for (int64_t q = 1; q <= 1000; ++q) {
        double p = std::round(x * q);
        if (std::abs(p / q - x) < 1e-12) return Rational(static_cast<int64_t>(p), q);
    }
    throw std::invalid_argument("parameter is not a small rational");
}

// Symbolic state in primitive variables (scalar systems: just u).
struct SymState {
    Expr rho, u, v, P;  // Euler
    Expr q;             // scalar
};

inline SymState state(const PdeSystem& sys, const std::string& tag = "") {
    SymState s;
    if (sys.kind != Kind::euler) {
        s.q = S("u" + tag);
        return s;
    }
    s.rho = S("rho" + tag);
    s.u = S("u" + tag);
    s.v = sys.dim == 2 ? S("v" + tag) : N(0);
    s.P = S("P" + tag);
    return s;
}

inline Assumptions assumptions(const PdeSystem& sys, const std::string& tag = "") {
    Assumptions A;
    if (sys.kind == Kind::euler) A.assume("rho" + tag, Pred::positive).assume("P" + tag, Pred::positive);
    return A;
}

struct EulerModel {
    Expr g;  // gamma
    bool two_d;

    Expr q2(const SymState& w) const { return two_d ? add(pow(w.u, N(2)), pow(w.v, N(2))) : pow(w.u, N(2)); }
    Expr energy(const SymState& w) const {
        return add(mul(w.P, inv(add(g, N(-1)))), mul({N(1, 2), w.rho, q2(w)}));
    }
    Expr enthalpy(const SymState& w) const { return mul(add(energy(w), w.P), inv(w.rho)); }
    Expr sound(const SymState& w) const { return sqrt(mul({g, w.P, inv(w.rho)})); }
    Expr un(const SymState& w, int dir) const { return dir == 0 ? w.u : w.v; }

    std::vector<Expr> conserved(const SymState& w) const {
        std::vector<Expr> U{w.rho, mul(w.rho, w.u)};
        if (two_d) U.push_back(mul(w.rho, w.v));
        U.push_back(energy(w));
        return U;
    }
    std::vector<Expr> flux(const SymState& w, int dir) const {
        Expr n = un(w, dir);
        std::vector<Expr> F{mul(w.rho, n), mul({w.rho, w.u, n})};
        if (two_d) F.push_back(mul({w.rho, w.v, n}));
        F[1 + dir] = add(F[1 + dir], w.P);
        F.push_back(mul(n, add(energy(w), w.P)));
        return F;
    }
};

inline EulerModel euler_model(const PdeSystem& sys) { return {num(to_rational(sys.params.gamma)), sys.dim == 2}; }

// Right (columns) and left (rows) eigenvectors at averaged u, v, H, c.
struct SymEigen {
    std::vector<Expr> lambda;
    std::vector<std::vector<Expr>> R, L;  // R[i][k]: component i of r_k; L[k][j]
};

inline SymEigen euler_eigen(const EulerModel& M, Expr u, Expr v, Expr H, Expr c, int dir) {
    const int m = M.two_d ? 4 : 3, n = 1 + dir, t = 2 - dir, e = m - 1;
    Expr un = dir == 0 ? u : v, ut = dir == 0 ? v : u;
    Expr q2 = M.two_d ? add(pow(u, N(2)), pow(v, N(2))) : pow(u, N(2));
    Expr b2 = mul(add(M.g, N(-1)), pow(c, N(-2)));
    Expr b1 = mul({N(1, 2), b2, q2});
    Expr ic = inv(c);
    auto zero = [&] { return std::vector<Expr>(m, N(0)); };
    SymEigen es;
    std::vector<std::vector<Expr>> cols;
    // acoustic minus
    auto r1 = zero();
    r1[0] = N(1);
    r1[n] = sub(un, c);
    if (M.two_d) r1[t] = ut;
    r1[e] = sub(H, mul(un, c));
    auto r2 = zero();
    r2[0] = N(1);
    r2[1] = u;
    if (M.two_d) r2[2] = v;
    r2[e] = mul(N(1, 2), q2);
    auto r4 = zero();
    r4[0] = N(1);
    r4[n] = add(un, c);
    if (M.two_d) r4[t] = ut;
    r4[e] = add(H, mul(un, c));
    auto l1 = zero(), l2 = zero(), l4 = zero();
    l1[0] = mul(N(1, 2), add(b1, mul(un, ic)));
    l1[n] = mul(N(1, 2), sub(neg(mul(b2, un)), ic));
    if (M.two_d) l1[t] = mul(N(1, 2), neg(mul(b2, ut)));
    l1[e] = mul(N(1, 2), b2);
    l2[0] = sub(N(1), b1);
    l2[1] = mul(b2, u);
    if (M.two_d) l2[2] = mul(b2, v);
    l2[e] = neg(b2);
    l4[0] = mul(N(1, 2), sub(b1, mul(un, ic)));
    l4[n] = mul(N(1, 2), add(neg(mul(b2, un)), ic));
    if (M.two_d) l4[t] = mul(N(1, 2), neg(mul(b2, ut)));
    l4[e] = mul(N(1, 2), b2);
    es.lambda = {sub(un, c), un};
    cols = {r1, r2};
    es.L = {l1, l2};
    if (M.two_d) {
        auto r3 = zero(), l3 = zero();
        r3[t] = N(1);
        r3[e] = ut;
        l3[0] = neg(ut);
        l3[t] = N(1);
        es.lambda.push_back(un);
        cols.push_back(r3);
        es.L.push_back(l3);
    }
    es.lambda.push_back(add(un, c));
    cols.push_back(r4);
    es.L.push_back(l4);
    es.R.assign(m, std::vector<Expr>(m));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) es.R[i][k] = cols[k][i];
    return es;
}

// Harten-Hyman fixed speed, mirroring entropy_fixed_speed.
inline Expr fixed_speed(Expr lam, Expr lamL, Expr lamR) {
    Expr delta = max({N(0), sub(lam, lamL), sub(lamR, lam)});
    Expr a = abs(lam);
    Expr smooth = mul({N(1, 2), add(pow(lam, N(2)), pow(delta, N(2))), inv(delta)});
    return piecewise(lt(N(0), delta), piecewise(lt(a, delta), smooth, a), a);
}

inline Expr roe_avg(Expr rhoL, Expr rhoR, Expr a, Expr b) {
    Expr sl = sqrt(rhoL), sr = sqrt(rhoR);
    return mul(add(mul(sl, a), mul(sr, b)), inv(add(sl, sr)));
}

inline std::vector<Expr> physical_flux(const PdeSystem& sys, const SymState& w, int dir) {
    switch (sys.kind) {
    case Kind::advection: return {mul(num(to_rational(sys.params.a)), w.q)};
    case Kind::burgers: return {mul(N(1, 2), pow(w.q, N(2)))};
    case Kind::euler: return euler_model(sys).flux(w, dir);
    }
    return {};
}

inline std::vector<Expr> conserved(const PdeSystem& sys, const SymState& w) {
    if (sys.kind != Kind::euler) return {w.q};
    return euler_model(sys).conserved(w);
}

inline Expr max_speed(const PdeSystem& sys, const SymState& w, int dir) {
    switch (sys.kind) {
    case Kind::advection: return abs(num(to_rational(sys.params.a)));
    case Kind::burgers: return abs(w.q);
    case Kind::euler: {
        auto M = euler_model(sys);
        return add(abs(M.un(w, dir)), M.sound(w));
    }
    }
    return nullptr;
}

inline std::vector<Expr> lax_friedrichs(const PdeSystem& sys, const SymState& L, const SymState& R, int dir) {
    auto fL = physical_flux(sys, L, dir), fR = physical_flux(sys, R, dir);
    auto uL = conserved(sys, L), uR = conserved(sys, R);
    Expr lam = max({max_speed(sys, L, dir), max_speed(sys, R, dir)});
    std::vector<Expr> F;
    for (size_t k = 0; k < fL.size(); ++k)
        F.push_back(sub(mul(N(1, 2), add(fL[k], fR[k])), mul({N(1, 2), lam, sub(uR[k], uL[k])})));
    return F;
}

inline std::vector<Expr> roe(const PdeSystem& sys, const SymState& L, const SymState& R, int dir) {
    auto fL = physical_flux(sys, L, dir), fR = physical_flux(sys, R, dir);
    auto uL = conserved(sys, L), uR = conserved(sys, R);
    const size_t m = fL.size();
    std::vector<Expr> F;
    if (sys.kind != Kind::euler) {
        Expr lam, lamL, lamR;
        if (sys.kind == Kind::advection) {
            lam = lamL = lamR = num(to_rational(sys.params.a));
        } else {
            lam = mul(N(1, 2), add(L.q, R.q));
            lamL = L.q;
            lamR = R.q;
        }
        Expr s = fixed_speed(lam, lamL, lamR);
        F.push_back(sub(mul(N(1, 2), add(fL[0], fR[0])), mul({N(1, 2), s, sub(uR[0], uL[0])})));
        return F;
    }
    auto M = euler_model(sys);
    Expr u = roe_avg(L.rho, R.rho, L.u, R.u);
    Expr v = M.two_d ? roe_avg(L.rho, R.rho, L.v, R.v) : N(0);
    Expr H = roe_avg(L.rho, R.rho, M.enthalpy(L), M.enthalpy(R));
    Expr q2 = M.two_d ? add(pow(u, N(2)), pow(v, N(2))) : pow(u, N(2));
    Expr c = sqrt(mul(add(M.g, N(-1)), sub(H, mul(N(1, 2), q2))));
    auto es = euler_eigen(M, u, v, H, c, dir);
    auto lamAt = [&](const SymState& w, size_t k) {
        Expr n = M.un(w, dir), cw = M.sound(w);
        if (k == 0) return sub(n, cw);
        if (k == m - 1) return add(n, cw);
        return n;
    };
    std::vector<Expr> alpha(m);
    for (size_t k = 0; k < m; ++k) {
        std::vector<Expr> t;
        for (size_t j = 0; j < m; ++j) t.push_back(mul(es.L[k][j], sub(uR[j], uL[j])));
        alpha[k] = add(t);
    }
    for (size_t i = 0; i < m; ++i) {
        std::vector<Expr> diss;
        for (size_t k = 0; k < m; ++k)
            diss.push_back(mul({fixed_speed(es.lambda[k], lamAt(L, k), lamAt(R, k)), alpha[k], es.R[i][k]}));
        F.push_back(sub(mul(N(1, 2), add(fL[i], fR[i])), mul(N(1, 2), add(diss))));
    }
    return F;
}

inline Expr limiter(Limiter kind, Expr th) {
    switch (kind) {
    case Limiter::none: return N(0);
    case Limiter::minmod: return max({N(0), min({N(1), th})});
    case Limiter::monotonized_centered:
        return max({N(0), min({mul(N(2), th), mul(N(1, 2), add(N(1), th)), N(2)})});
    case Limiter::van_leer: return mul(add(th, abs(th)), inv(add(N(1), abs(th))));
    case Limiter::superbee: return max({N(0), min({mul(N(2), th), N(1)}), min({th, N(2)})});
    }
    throw std::invalid_argument("unknown limiter");
}

}  // namespace symbolic

struct SolverProofs {
    std::vector<sym::ProofCertificate> certificates;
    bool all_proved() const {
        for (auto& c : certificates)
            if (!c.proved) return false;
        return true;
    }
};

inline std::vector<sym::ProofCertificate> flux_continuity(const PdeSystem& sys, FluxKind kind) {
    using namespace symbolic;
    std::vector<ProofCertificate> out;
    auto w = state(sys);
    auto A = assumptions(sys);
    for (int dir = 0; dir < sys.dim; ++dir) {
        auto F = kind == FluxKind::roe ? roe(sys, w, w, dir) : lax_friedrichs(sys, w, w, dir);
        auto f = physical_flux(sys, w, dir);
        for (size_t k = 0; k < F.size(); ++k) {
            std::string name = "flux_continuity/" + to_string(kind) + "/" + sys.name + "/" + "xy"[dir] + "/" +
                               sys.component_names()[k];
            out.push_back(prove_equal(name, F[k], f[k], A));
        }
    }
    if (sys.kind == Kind::euler && kind == FluxKind::roe)
        out.push_back(prove_equal("roe_average_consistency/" + sys.name, roe_avg(w.rho, w.rho, S("a"), S("a")), S("a"),
                                  A));
    return out;
}

inline std::vector<sym::ProofCertificate> hyperbolicity(const PdeSystem& sys) {
    using namespace symbolic;
    auto w = state(sys);
    auto A = assumptions(sys);
    std::string name = "hyperbolicity/" + sys.name;
    if (sys.kind == Kind::advection)
        return {prove_equal(name, sym::detail::diff_raw(physical_flux(sys, w, 0)[0], "u", A),
                            num(to_rational(sys.params.a)), A)};
    if (sys.kind == Kind::burgers)
        return {prove_equal(name, sym::detail::diff_raw(physical_flux(sys, w, 0)[0], "u", A), w.q, A)};
    // c^2 = (g - 1)(H - q^2/2) > 0 makes u - c < u < u + c real and distinct
    auto M = euler_model(sys);
    Expr c2 = mul(add(M.g, N(-1)), sub(M.enthalpy(w), mul(N(1, 2), M.q2(w))));
    return {prove_predicate(name + "/sound_speed_squared", c2, Pred::positive, A),
            prove_predicate(name + "/sound_speed", M.sound(w), Pred::positive, A)};
}

// |lambda| dt / dx <= C from dt = C dx / smax with smax = |lambda| + s, s >= 0.
inline sym::ProofCertificate cfl_form(const PdeSystem& sys) {
    using namespace symbolic;
    Assumptions A;
    A.assume("C", Pred::positive).assume("dx", Pred::positive).assume("smax", Pred::positive).assume("s", Pred::nonneg);
    Expr goal = sub(S("C"), mul({S("abs_lambda"), S("dt"), inv(S("dx"))}));
    std::map<std::string, Expr> defs{{"dt", mul({S("C"), S("dx"), inv(S("smax"))})},
                                     {"abs_lambda", sub(S("smax"), S("s"))}};
    return prove_predicate("cfl_form/" + sys.name, goal, Pred::nonneg, A, defs);
}

inline std::vector<sym::ProofCertificate> limiter_evidence(Limiter kind) {
    using namespace symbolic;
    using sym::Rational;
    const std::string base = "limiter/" + to_string(kind) + "/";
    Expr th = S("theta");
    std::vector<Rational> pos{{1, 4}, {1, 2}, {1}, {3, 2}, {2}, {4}}, nonpos{{-2}, {-1, 2}, {0}};
    std::vector<ProofCertificate> out;
    out.push_back(numeric_evidence(base + "symmetry", mul(limiter(kind, th), inv(th)), limiter(kind, inv(th)), "eq",
                                   "theta", pos));
    out.push_back(numeric_evidence(base + "tvd_upper", limiter(kind, th), min({mul(N(2), th), N(2)}), "le", "theta", pos));
    out.push_back(numeric_evidence(base + "tvd_lower", N(0), limiter(kind, th), "le", "theta", pos));
    out.push_back(numeric_evidence(base + "vanishes_at_extrema", limiter(kind, th), N(0), "eq", "theta", nonpos));
    return out;
}

inline SolverProofs prove_solver_properties(const PdeSystem& sys, Limiter lim) {
    SolverProofs s;
    for (auto kind : {FluxKind::lax_friedrichs, FluxKind::roe})
        for (auto& c : flux_continuity(sys, kind)) s.certificates.push_back(c);
    for (auto& c : hyperbolicity(sys)) s.certificates.push_back(c);
    s.certificates.push_back(cfl_form(sys));
    for (auto& c : limiter_evidence(lim)) s.certificates.push_back(c);
    return s;
}

}  // namespace beacons
