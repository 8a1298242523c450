// Symbolic differentiation and one-sided limits.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rewrite.hpp"

namespace beacons::sym {

class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool depends_on(const Expr& e, const std::string& x) {
    if (e->op == Op::sym) return e->name == x;
    for (auto& a : e->args)
        if (depends_on(a, x)) return true;
    return false;
}

namespace detail {

inline Expr diff_raw(const Expr& e, const std::string& x, const Assumptions& A) {
    if (!depends_on(e, x)) return num(0);
    const auto& a = e->args;
    auto d = [&](const Expr& s) { return diff_raw(s, x, A); };
    switch (e->op) {
    case Op::sym: return num(1);
    case Op::add: {
        std::vector<Expr> t;
        for (auto& s : a)
            if (depends_on(s, x)) t.push_back(d(s));
        return add(t);
    }
    case Op::mul: {
        // constant factors contribute no terms
        std::vector<Expr> t;
        for (size_t k = 0; k < a.size(); ++k) {
            if (!depends_on(a[k], x)) continue;
            auto f = a;
            f[k] = d(a[k]);
            t.push_back(mul(f));
        }
        return add(t);
    }
    case Op::pow: {
        if (depends_on(a[1], x)) throw Unsupported("diff: exponent depends on " + x);
        return mul({a[1], pow(a[0], add(a[1], num(-1))), d(a[0])});
    }
    case Op::sqrt: return mul({num(1, 2), pow(a[0], num(-1, 2)), d(a[0])});
    case Op::abs: {
        if (is_nonzero(a[0], A) && is_nonneg(a[0], A)) return d(a[0]);
        if (is_negative(a[0], A)) return neg(d(a[0]));
        throw Unsupported("diff: abs with unresolved sign");
    }
    case Op::min:
    case Op::max: {
        if (a.size() != 2) throw Unsupported("diff: min/max needs two arguments");
        auto gap = simplify(sub(a[0], a[1]), A).result;
        bool first_larger = is_positive(gap, A), second_larger = is_negative(gap, A);
        if (!first_larger && !second_larger) throw Unsupported("diff: min/max with unresolved order");
        bool pick_first = e->op == Op::max ? first_larger : second_larger;
        return d(a[pick_first ? 0 : 1]);
    }
    case Op::sinh: return mul(fn(Op::cosh, a[0]), d(a[0]));
    case Op::cosh: return mul(fn(Op::sinh, a[0]), d(a[0]));
    case Op::arcsinh: return mul(pow(add(pow(a[0], num(2)), num(1)), num(-1, 2)), d(a[0]));
    case Op::tanh: return mul(add(num(1), neg(pow(fn(Op::tanh, a[0]), num(2)))), d(a[0]));
    case Op::sin: return mul(fn(Op::cos, a[0]), d(a[0]));
    case Op::cos: return mul({num(-1), fn(Op::sin, a[0]), d(a[0])});
    case Op::piecewise:
        // valid away from the switching set
        return piecewise(a[0], d(a[1]), d(a[2]));
    default: throw Unsupported(std::string("diff: unsupported operator ") + op_name(e->op));
    }
}

}  // namespace detail

inline Expr diff(const Expr& e, const std::string& x, const Assumptions& A = {}) {
    return simplify(detail::diff_raw(e, x, A), A).result;
}

// Direction of approach: -1 from the left, +1 from the right, 0 two-sided.
struct LimitResult {
    bool defined = false;
    Expr value;  // rational expression or an infinity marker
    std::string reason;
};

namespace detail {

inline bool undefined_at(const Expr& e) {
    if (e->op == Op::pow && is_num(e->args[0], 0) && is_num(e->args[1]) && e->args[1]->value.sign() < 0) return true;
    for (auto& a : e->args)
        if (undefined_at(a)) return true;
    return false;
}

inline bool has_piecewise(const Expr& e) {
    if (e->op == Op::piecewise) return true;
    for (auto& a : e->args)
        if (has_piecewise(a)) return true;
    return false;
}

// Numerator and denominator with all negative integer powers moved down.
inline std::pair<Expr, Expr> as_fraction(const Expr& e) {
    if (e->op == Op::pow && is_num(e->args[1]) && e->args[1]->value.sign() < 0)
        return {num(1), pow(e->args[0], num(-e->args[1]->value))};
    if (e->op == Op::mul) {
        std::vector<Expr> n, d;
        for (auto& f : e->args) {
            auto [fn_, fd] = as_fraction(f);
            n.push_back(fn_);
            d.push_back(fd);
        }
        return {mul(n), mul(d)};
    }
    if (e->op == Op::add) {
        std::vector<std::pair<Expr, Expr>> parts;
        std::vector<Expr> den;  // distinct denominators
        for (auto& t : e->args) {
            parts.push_back(as_fraction(t));
            bool seen = false;
            for (auto& d : den) seen = seen || equal(d, parts.back().second);
            if (!seen) den.push_back(parts.back().second);
        }
        std::vector<Expr> terms;
        for (auto& [pn, pd] : parts) {
            std::vector<Expr> f{pn};
            for (auto& d : den)
                if (!equal(d, pd)) f.push_back(d);
            terms.push_back(mul(f));
        }
        return {add(terms), mul(den)};
    }
    return {e, num(1)};
}

inline Expr at(const Expr& e, const std::string& x, const Rational& p, const Assumptions& A) {
    return simplify(substitute(e, {{x, num(p)}}), A).result;
}

// Replace piecewise nodes by the branch active just beside the point.
inline Expr resolve_side(const Expr& e, const std::string& x, const Rational& p, int side, const Assumptions& A) {
    if (e->op != Op::piecewise) {
        if (e->args.empty()) return e;
        std::vector<Expr> args;
        for (auto& a : e->args) args.push_back(resolve_side(a, x, p, side, A));
        return with_args(e, args);
    }
    const Rational h(1, 1000000);
    auto g = at(e->args[0], x, p + Rational(side) * h, A);
    bool v;
    if (!guard_value(g, v)) throw Unsupported("limit: guard " + to_string(e->args[0]) + " undecidable near point");
    return resolve_side(e->args[v ? 1 : 2], x, p, side, A);
}

inline LimitResult limit_smooth(const Expr& e0, const std::string& x, const Rational& p, int side,
                                const Assumptions& A) {
    auto e = simplify(e0, A).result;
    auto direct = at(e, x, p, A);
    if (!undefined_at(direct)) return {true, direct, "substitution"};
    auto [n, d] = as_fraction(e0);
    n = simplify(n, A).result;
    d = simplify(d, A).result;
    auto n0 = at(n, x, p, A), d0 = at(d, x, p, A);
    if (undefined_at(n0) || undefined_at(d0)) return {false, nullptr, "unsupported form"};
    bool d_zero = is_num(d0, 0), n_zero = is_num(n0, 0);
    if (!d_zero) {
        if (!is_nonzero(d0, A)) return {false, nullptr, "denominator sign unresolved"};
        return {true, simplify(div(n0, d0), A).result, "fraction"};
    }
    if (n_zero) {
        auto dn = at(diff(n, x, A), x, p, A), dd = at(diff(d, x, A), x, p, A);
        if (undefined_at(dn) || undefined_at(dd) || is_num(dd, 0) || !is_nonzero(dd, A))
            return {false, nullptr, "0/0 not resolved by one L'Hopital pass"};
        return {true, simplify(div(dn, dd), A).result, "lhopital"};
    }
    // pole: sign of n0 / d just beside the point
    int ns = is_positive(n0, A) ? 1 : is_negative(n0, A) ? -1 : 0;
    if (ns == 0) return {false, nullptr, "pole with unresolved numerator sign"};
    auto sgn_beside = [&](int s) -> int {
        auto v = evaluate_exact(at(d, x, p + Rational(s) * Rational(1, 1000000), A));
        return v ? v->sign() : 0;
    };
    if (side == 0) {
        int l = sgn_beside(-1), r = sgn_beside(1);
        if (l == 0 || l != r) return {false, nullptr, "two-sided pole with differing signs"};
        return {true, infinity(ns * r), "pole"};
    }
    int ds = sgn_beside(side);
    if (ds == 0) return {false, nullptr, "pole with unresolved denominator sign"};
    return {true, infinity(ns * ds), "pole"};
}

}  // namespace detail

inline LimitResult limit(const Expr& e, const std::string& x, const Rational& p, int side = 0,
                         const Assumptions& A = {}) {
    using namespace detail;
    try {
        if (!has_piecewise(e)) return limit_smooth(e, x, p, side, A);
        if (side != 0) return limit_smooth(resolve_side(e, x, p, side, A), x, p, side, A);
        auto l = limit_smooth(resolve_side(e, x, p, -1, A), x, p, -1, A);
        auto r = limit_smooth(resolve_side(e, x, p, 1, A), x, p, 1, A);
        if (l.defined && r.defined && equal(l.value, r.value)) return l;
        return {false, nullptr, "one-sided limits differ"};
    } catch (const Unsupported& err) {
        return {false, nullptr, err.what()};
    }
}

}  // namespace beacons::sym
