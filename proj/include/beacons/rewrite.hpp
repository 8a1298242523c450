// Rule table and normalizing strategies. Normal form is an expanded
// polynomial in canonical order: sums of products of powers.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"

namespace beacons::sym {

enum class Pred { positive, nonneg, nonzero, negative, real };

inline std::string to_string(Pred p) {
    switch (p) {
    case Pred::positive: return "positive";
    case Pred::nonneg: return "nonneg";
    case Pred::nonzero: return "nonzero";
    case Pred::negative: return "negative";
    case Pred::real: return "real";
    }
    return "?";
}

inline Pred pred_from_string(const std::string& s) {
    for (Pred p : {Pred::positive, Pred::nonneg, Pred::nonzero, Pred::negative, Pred::real})
        if (to_string(p) == s) return p;
    throw std::invalid_argument("unknown predicate " + s);
}

struct Assumptions {
    std::map<std::string, std::set<Pred>> facts;

    Assumptions& assume(const std::string& s, Pred p) {
        facts[s].insert(p);
        return *this;
    }
    bool has(const std::string& s, Pred p) const {
        auto it = facts.find(s);
        return it != facts.end() && it->second.count(p);
    }
    bool operator==(const Assumptions& o) const { return facts == o.facts; }
};

// Conservative sign reasoning: 1 proved positive, 0 unknown.
inline bool is_positive(const Expr& e, const Assumptions& A);
inline bool is_nonneg(const Expr& e, const Assumptions& A);
inline bool is_negative(const Expr& e, const Assumptions& A);

inline bool is_nonzero(const Expr& e, const Assumptions& A) {
    if (e->op == Op::sym && A.has(e->name, Pred::nonzero)) return true;
    if (e->op == Op::mul) {
        for (auto& a : e->args)
            if (!is_nonzero(a, A)) return false;
        return true;
    }
    if (e->op == Op::pow && is_num(e->args[1])) return is_nonzero(e->args[0], A);
    return is_positive(e, A) || is_negative(e, A);
}

inline bool is_positive(const Expr& e, const Assumptions& A) {
    switch (e->op) {
    case Op::num: return e->value.sign() > 0;
    case Op::sym: return A.has(e->name, Pred::positive);
    case Op::add: {
        bool strict = false;
        for (auto& a : e->args) {
            if (is_positive(a, A)) strict = true;
            else if (!is_nonneg(a, A)) return false;
        }
        return strict;
    }
    case Op::mul: {
        int negs = 0;
        for (auto& a : e->args) {
            if (is_negative(a, A)) ++negs;
            else if (!is_positive(a, A)) return false;
        }
        return negs % 2 == 0;
    }
    case Op::pow:
        if (is_positive(e->args[0], A)) return true;
        if (is_num(e->args[1]) && e->args[1]->value.is_integer() && e->args[1]->value.num() % 2 == 0)
            return is_nonzero(e->args[0], A);
        return false;
    case Op::sqrt: return is_positive(e->args[0], A);
    case Op::abs: return is_nonzero(e->args[0], A);
    case Op::cosh: return true;
    case Op::sinh:
    case Op::arcsinh:
    case Op::tanh: return is_positive(e->args[0], A);
    case Op::min:
        for (auto& a : e->args)
            if (!is_positive(a, A)) return false;
        return true;
    case Op::max:
        for (auto& a : e->args)
            if (is_positive(a, A)) return true;
        return false;
    default: return false;
    }
}

inline bool is_nonneg(const Expr& e, const Assumptions& A) {
    if (is_positive(e, A)) return true;
    switch (e->op) {
    case Op::num: return e->value.sign() >= 0;
    case Op::sym: return A.has(e->name, Pred::nonneg);
    case Op::add:
        for (auto& a : e->args)
            if (!is_nonneg(a, A)) return false;
        return true;
    case Op::mul: {
        int negs = 0;
        for (auto& a : e->args) {
            if (is_negative(a, A)) ++negs;
            else if (!is_nonneg(a, A)) return false;
        }
        return negs % 2 == 0;
    }
    case Op::pow:
        if (is_nonneg(e->args[0], A) && !(is_num(e->args[1]) && e->args[1]->value.sign() < 0)) return true;
        return is_num(e->args[1]) && e->args[1]->value.is_integer() && e->args[1]->value.num() % 2 == 0 &&
               e->args[1]->value.sign() > 0;
    case Op::sqrt:
    case Op::abs: return true;
    case Op::sinh:
    case Op::arcsinh:
    case Op::tanh: return is_nonneg(e->args[0], A);
    case Op::max:
        for (auto& a : e->args)
            if (is_nonneg(a, A)) return true;
        return false;
    case Op::min:
        for (auto& a : e->args)
            if (!is_nonneg(a, A)) return false;
        return true;
    default: return false;
    }
}

inline bool is_negative(const Expr& e, const Assumptions& A) {
    switch (e->op) {
    case Op::num: return e->value.sign() < 0;
    case Op::sym: return A.has(e->name, Pred::negative);
    case Op::mul: {
        int negs = 0;
        for (auto& a : e->args) {
            if (is_negative(a, A)) ++negs;
            else if (!is_positive(a, A)) return false;
        }
        return negs % 2 == 1;
    }
    case Op::add:
        for (auto& a : e->args)
            if (!is_negative(a, A)) return false;
        return true;
    default: return false;
    }
}

struct Rule {
    std::string name;
    std::string pattern;  // human-readable left -> right [if side condition]
    std::function<std::optional<Expr>(const Expr&, const Assumptions&)> apply;
};

namespace detail {

inline std::optional<Rational> exponent(const Expr& e) {
    if (e->op == Op::pow && is_num(e->args[1])) return e->args[1]->value;
    return std::nullopt;
}

// Split a product term into (coefficient, rest) for collecting like terms.
inline std::pair<Rational, Expr> split_coeff(const Expr& t) {
    if (is_num(t)) return {t->value, num(1)};
    if (t->op == Op::mul && is_num(t->args[0])) {
        if (t->args.size() == 2) return {t->args[0]->value, t->args[1]};
        return {t->args[0]->value, mul(std::vector<Expr>(t->args.begin() + 1, t->args.end()))};
    }
    return {Rational(1), t};
}

inline std::pair<Expr, Rational> split_power(const Expr& f) {
    if (auto k = exponent(f)) return {f->args[0], *k};
    return {f, Rational(1)};
}

inline bool sorted(const std::vector<Expr>& v) {
    for (size_t k = 1; k < v.size(); ++k)
        if (compare(v[k - 1], v[k]) > 0) return false;
    return true;
}

inline std::optional<Expr> fold_fn_zero(const Expr& e, Op op, int64_t value) {
    if (e->op == op && is_num(e->args[0], 0)) return num(value);
    return std::nullopt;
}

// No division by a quantity that might vanish.
inline bool defined(const Expr& e, const Assumptions& A) {
    if (e->op == Op::pow && !(is_num(e->args[1]) && e->args[1]->value.sign() > 0) && !is_nonzero(e->args[0], A))
        return false;
    for (auto& a : e->args)
        if (!defined(a, A)) return false;
    return true;
}

inline bool guard_value(const Expr& g, bool& out) {
    if ((g->op != Op::lt && g->op != Op::le) || !is_num(g->args[0]) || !is_num(g->args[1])) return false;
    out = g->op == Op::lt ? g->args[0]->value < g->args[1]->value : g->args[0]->value <= g->args[1]->value;
    return true;
}

}  // namespace detail

// Priority-ordered rule table shared by the prover and the checker.
inline const std::vector<Rule>& rules() {
    using namespace detail;
    static const std::vector<Rule> table = {
        {"flatten_add", "(+ .. (+ xs) ..) -> (+ .. xs ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::add) return std::nullopt;
             for (size_t k = 0; k < e->args.size(); ++k)
                 if (e->args[k]->op == Op::add) {
                     std::vector<Expr> a(e->args.begin(), e->args.begin() + k);
                     a.insert(a.end(), e->args[k]->args.begin(), e->args[k]->args.end());
                     a.insert(a.end(), e->args.begin() + k + 1, e->args.end());
                     return add(a);
                 }
             return std::nullopt;
         }},
        {"flatten_mul", "(* .. (* xs) ..) -> (* .. xs ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::mul) return std::nullopt;
             for (size_t k = 0; k < e->args.size(); ++k)
                 if (e->args[k]->op == Op::mul) {
                     std::vector<Expr> a(e->args.begin(), e->args.begin() + k);
                     a.insert(a.end(), e->args[k]->args.begin(), e->args[k]->args.end());
                     a.insert(a.end(), e->args.begin() + k + 1, e->args.end());
                     return mul(a);
                 }
             return std::nullopt;
         }},
        {"mul_zero", "(* .. 0 ..) -> 0 if every factor is defined",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op != Op::mul) return std::nullopt;
             bool zero = false;
             for (auto& a : e->args) {
                 if (is_num(a, 0)) zero = true;
                 else if (!defined(a, A)) return std::nullopt;
             }
             if (zero) return num(0);
             return std::nullopt;
         }},
        {"add_unit", "(+ x) -> x; (+ .. 0 ..) -> (+ ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::add) return std::nullopt;
             if (e->args.size() == 1) return e->args[0];
             std::vector<Expr> a;
             for (auto& x : e->args)
                 if (!is_num(x, 0)) a.push_back(x);
             if (a.size() == e->args.size()) return std::nullopt;
             if (a.empty()) return num(0);
             return a.size() == 1 ? a[0] : add(a);
         }},
        {"mul_unit", "(* x) -> x; (* .. 1 ..) -> (* ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::mul) return std::nullopt;
             if (e->args.size() == 1) return e->args[0];
             std::vector<Expr> a;
             for (auto& x : e->args)
                 if (!is_num(x, 1)) a.push_back(x);
             if (a.size() == e->args.size()) return std::nullopt;
             if (a.empty()) return num(1);
             return a.size() == 1 ? a[0] : mul(a);
         }},
        {"fold_add", "(+ .. p .. q ..) -> (+ p+q ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::add) return std::nullopt;
             Rational s(0);
             int count = 0;
             std::vector<Expr> rest;
             for (auto& x : e->args) {
                 if (is_num(x)) {
                     s = s + x->value;
                     ++count;
                 } else {
                     rest.push_back(x);
                 }
             }
             if (count < 2) return std::nullopt;
             rest.insert(rest.begin(), num(s));
             return rest.size() == 1 ? rest[0] : add(rest);
         }},
        {"fold_mul", "(* .. p .. q ..) -> (* p*q ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::mul) return std::nullopt;
             Rational s(1);
             int count = 0;
             std::vector<Expr> rest;
             for (auto& x : e->args) {
                 if (is_num(x)) {
                     s = s * x->value;
                     ++count;
                 } else {
                     rest.push_back(x);
                 }
             }
             if (count < 2) return std::nullopt;
             rest.insert(rest.begin(), num(s));
             return rest.size() == 1 ? rest[0] : mul(rest);
         }},
        {"sqrt_to_pow", "(sqrt x) -> (^ x 1/2)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::sqrt) return std::nullopt;
             return pow(e->args[0], num(1, 2));
         }},
        {"pow_fold", "(^ p k) -> p^k for rational p, integer k",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::pow || !is_num(e->args[0]) || !is_num(e->args[1])) return std::nullopt;
             Rational b = e->args[0]->value, k = e->args[1]->value;
             if (!k.is_integer() || (b.is_zero() && k.sign() <= 0)) return std::nullopt;
             try {
                 return num(b.pow(k.num()));
             } catch (const std::overflow_error&) {
                 return std::nullopt;
             }
         }},
        {"pow_one", "(^ x 1) -> x",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op == Op::pow && is_num(e->args[1], 1)) return e->args[0];
             return std::nullopt;
         }},
        {"pow_zero", "(^ x 0) -> 1 if nonzero(x)",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op == Op::pow && is_num(e->args[1], 0) && is_nonzero(e->args[0], A)) return num(1);
             return std::nullopt;
         }},
        {"pow_base_one", "(^ 1 x) -> 1",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op == Op::pow && is_num(e->args[0], 1)) return num(1);
             return std::nullopt;
         }},
        {"pow_pow", "(^ (^ x a) b) -> (^ x a*b) if b integer or positive(x)",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op != Op::pow || !is_num(e->args[1])) return std::nullopt;
             auto inner = exponent(e->args[0]);
             if (!inner) return std::nullopt;
             Rational b = e->args[1]->value;
             const Expr& x = e->args[0]->args[0];
             // powers of sums expand instead
             if (x->op == Op::add && b.is_integer() && inner->is_integer() && b.sign() > 0 && inner->sign() > 0)
                 return std::nullopt;
             if (!(b.is_integer() || is_positive(x, A))) return std::nullopt;
             // even roots of odd powers would drop a sign
             if (!inner->is_integer() && !is_nonneg(x, A)) return std::nullopt;
             if ((*inner * b).sign() < 0 || inner->sign() < 0 || b.sign() < 0)
                 if (!is_nonzero(x, A)) return std::nullopt;
             return pow(x, num(*inner * b));
         }},
        {"pow_mul", "(^ (* xs) k) -> (* (^ x k) ..) if k integer or all x positive",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op != Op::pow || e->args[0]->op != Op::mul || !is_num(e->args[1])) return std::nullopt;
             Rational k = e->args[1]->value;
             if (!k.is_integer())
                 for (auto& f : e->args[0]->args)
                     if (!is_positive(f, A)) return std::nullopt;
             std::vector<Expr> out;
             for (auto& f : e->args[0]->args) out.push_back(pow(f, num(k)));
             return mul(out);
         }},
        {"pow_expand", "(^ (+ xs) k) -> (* (+ xs) .. k times) for 2 <= k <= 6",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::pow || e->args[0]->op != Op::add || !is_num(e->args[1])) return std::nullopt;
             Rational k = e->args[1]->value;
             if (!k.is_integer() || k.num() < 2 || k.num() > 6) return std::nullopt;
             return mul(std::vector<Expr>(k.num(), e->args[0]));
         }},
        {"sort_add", "(+ xs) -> (+ sorted xs)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::add || sorted(e->args)) return std::nullopt;
             auto a = e->args;
             std::stable_sort(a.begin(), a.end(), [](const Expr& x, const Expr& y) { return compare(x, y) < 0; });
             return add(a);
         }},
        {"sort_mul", "(* xs) -> (* sorted xs)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::mul || sorted(e->args)) return std::nullopt;
             auto a = e->args;
             std::stable_sort(a.begin(), a.end(), [](const Expr& x, const Expr& y) { return compare(x, y) < 0; });
             return mul(a);
         }},
        {"collect_add", "(+ .. p*t .. q*t ..) -> (+ .. (p+q)*t ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::add) return std::nullopt;
             const size_t n = e->args.size();
             for (size_t i = 0; i < n; ++i) {
                 if (is_num(e->args[i])) continue;
                 auto [ci, ti] = split_coeff(e->args[i]);
                 for (size_t j = i + 1; j < n; ++j) {
                     if (is_num(e->args[j])) continue;
                     auto [cj, tj] = split_coeff(e->args[j]);
                     if (!equal(ti, tj)) continue;
                     std::vector<Expr> a;
                     for (size_t k = 0; k < n; ++k) {
                         if (k == i) a.push_back(mul(num(ci + cj), ti));
                         else if (k != j) a.push_back(e->args[k]);
                     }
                     return a.size() == 1 ? a[0] : add(a);
                 }
             }
             return std::nullopt;
         }},
        {"collect_mul", "(* .. x^a .. x^b ..) -> (* .. x^(a+b) ..) if nonzero(x) when cancelling, nonneg(x) for roots",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op != Op::mul) return std::nullopt;
             const size_t n = e->args.size();
             for (size_t i = 0; i < n; ++i) {
                 if (is_num(e->args[i])) continue;
                 auto [bi, ki] = split_power(e->args[i]);
                 for (size_t j = i + 1; j < n; ++j) {
                     auto [bj, kj] = split_power(e->args[j]);
                     if (!equal(bi, bj)) continue;
                     // products of sums expand instead; merging would undo pow_expand
                     if (bi->op == Op::add && ki.sign() > 0 && kj.sign() > 0 && ki.is_integer() && kj.is_integer())
                         continue;
                     Rational k = ki + kj;
                     bool cancels = ki.sign() != kj.sign() || k.is_zero();
                     if (cancels && !is_nonzero(bi, A)) continue;
                     if ((!ki.is_integer() || !kj.is_integer()) && !is_nonneg(bi, A)) continue;
                     std::vector<Expr> a;
                     for (size_t m = 0; m < n; ++m) {
                         if (m == i) a.push_back(pow(bi, num(k)));
                         else if (m != j) a.push_back(e->args[m]);
                     }
                     return a.size() == 1 ? a[0] : mul(a);
                 }
             }
             return std::nullopt;
         }},
        {"distribute", "(* .. (+ ys) ..) -> (+ (* .. y ..) ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::mul) return std::nullopt;
             for (size_t k = 0; k < e->args.size(); ++k)
                 if (e->args[k]->op == Op::add) {
                     std::vector<Expr> terms;
                     for (auto& y : e->args[k]->args) {
                         auto f = e->args;
                         f[k] = y;
                         terms.push_back(mul(f));
                     }
                     return add(terms);
                 }
             return std::nullopt;
         }},
        {"abs_num", "(abs p) -> |p|",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op == Op::abs && is_num(e->args[0]))
                 return num(e->args[0]->value.sign() < 0 ? -e->args[0]->value : e->args[0]->value);
             return std::nullopt;
         }},
        {"abs_nonneg", "(abs x) -> x if nonneg(x)",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op == Op::abs && !is_num(e->args[0]) && is_nonneg(e->args[0], A)) return e->args[0];
             return std::nullopt;
         }},
        {"abs_negative", "(abs x) -> (* -1 x) if negative(x)",
         [](const Expr& e, const Assumptions& A) -> std::optional<Expr> {
             if (e->op == Op::abs && !is_num(e->args[0]) && is_negative(e->args[0], A)) return neg(e->args[0]);
             return std::nullopt;
         }},
        {"minmax_fold", "(min p q ..) / (max p q ..) on rationals -> extremum",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::min && e->op != Op::max) return std::nullopt;
             if (e->args.size() == 1) return e->args[0];
             std::optional<Rational> best;
             int count = 0;
             std::vector<Expr> rest;
             for (auto& x : e->args) {
                 if (!is_num(x)) {
                     rest.push_back(x);
                     continue;
                 }
                 ++count;
                 if (!best) best = x->value;
                 else if (e->op == Op::min ? x->value < *best : *best < x->value) best = x->value;
             }
             if (count < 2) return std::nullopt;
             rest.insert(rest.begin(), num(*best));
             return rest.size() == 1 ? rest[0] : make_node(e->op, rest);
         }},
        {"minmax_dedupe", "(min .. x .. x ..) -> (min .. x ..)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op != Op::min && e->op != Op::max) return std::nullopt;
             std::vector<Expr> a;
             for (auto& x : e->args) {
                 bool dup = false;
                 for (auto& y : a)
                     if (equal(x, y)) dup = true;
                 if (!dup) a.push_back(x);
             }
             if (a.size() == e->args.size()) return std::nullopt;
             return a.size() == 1 ? a[0] : make_node(e->op, a);
         }},
        {"minmax_sort", "(min xs) -> (min sorted xs)",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if ((e->op != Op::min && e->op != Op::max) || sorted(e->args)) return std::nullopt;
             auto a = e->args;
             std::stable_sort(a.begin(), a.end(), [](const Expr& x, const Expr& y) { return compare(x, y) < 0; });
             return make_node(e->op, a);
         }},
        {"fn_zero", "sinh/arcsinh/tanh/sin at 0 -> 0; cosh/cos at 0 -> 1",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             for (Op op : {Op::sinh, Op::arcsinh, Op::tanh, Op::sin})
                 if (auto r = fold_fn_zero(e, op, 0)) return r;
             for (Op op : {Op::cosh, Op::cos})
                 if (auto r = fold_fn_zero(e, op, 1)) return r;
             return std::nullopt;
         }},
        {"fn_inverse", "(arcsinh (sinh x)) -> x; (sinh (arcsinh x)) -> x",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op == Op::arcsinh && e->args[0]->op == Op::sinh) return e->args[0]->args[0];
             if (e->op == Op::sinh && e->args[0]->op == Op::arcsinh) return e->args[0]->args[0];
             return std::nullopt;
         }},
        {"piecewise_decide", "(piecewise (< p q) a b) -> a or b for rational p, q",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             bool v;
             if (e->op == Op::piecewise && guard_value(e->args[0], v)) return v ? e->args[1] : e->args[2];
             return std::nullopt;
         }},
        {"piecewise_same", "(piecewise g a a) -> a",
         [](const Expr& e, const Assumptions&) -> std::optional<Expr> {
             if (e->op == Op::piecewise && equal(e->args[1], e->args[2])) return e->args[1];
             return std::nullopt;
         }},
    };
    return table;
}

inline const Rule& find_rule(const std::string& name) {
    for (auto& r : rules())
        if (r.name == name) return r;
    throw std::invalid_argument("unknown rule " + name);
}

inline std::optional<std::pair<std::string, Expr>> first_rule(const Expr& e, const Assumptions& A) {
    for (auto& r : rules())
        if (auto out = r.apply(e, A)) return std::make_pair(r.name, *out);
    return std::nullopt;
}

struct Step {
    std::string rule;
    std::vector<int> path;
    Expr before, after;
};

enum class Strategy { innermost, outermost, random };

struct SimplifyOptions {
    Strategy strategy = Strategy::innermost;
    size_t step_limit = 100000;
    uint64_t seed = 0;
    bool record = true;
};

class StepLimitExceeded : public std::runtime_error {
public:
    StepLimitExceeded() : std::runtime_error("simplify: step limit exceeded") {}
};

namespace detail {

class Innermost {
public:
    Innermost(const Assumptions& A, const SimplifyOptions& o, std::vector<Step>& trace)
        : A_(A), o_(o), trace_(trace) {}

    Expr run(const Expr& e) {
        root_ = e;
        std::vector<int> path;
        return normalize(e, path);
    }

private:
    // Normalizes the subterm at path, keeping root_ current for the trace.
    Expr normalize(Expr e, std::vector<int>& path) {
        for (;;) {
            if (!e->args.empty()) {
                std::vector<Expr> args = e->args;
                bool changed = false;
                for (size_t k = 0; k < args.size(); ++k) {
                    path.push_back(static_cast<int>(k));
                    Expr a = normalize(args[k], path);
                    path.pop_back();
                    if (a.get() != args[k].get()) {
                        args[k] = a;
                        changed = true;
                    }
                }
                if (changed) e = with_args(e, std::move(args));
            }
            auto hit = first_rule(e, A_);
            if (!hit) return e;
            if (++steps_ > o_.step_limit) throw StepLimitExceeded();
            Expr before_root = root_;
            root_ = replace_at(root_, path, hit->second);
            if (o_.record) trace_.push_back({hit->first, path, before_root, root_});
            e = hit->second;
        }
    }

    const Assumptions& A_;
    const SimplifyOptions& o_;
    std::vector<Step>& trace_;
    Expr root_;
    size_t steps_ = 0;
};

inline void redexes(const Expr& e, const Assumptions& A, std::vector<int>& path,
                    std::vector<std::vector<int>>& out) {
    if (first_rule(e, A)) out.push_back(path);
    for (size_t k = 0; k < e->args.size(); ++k) {
        path.push_back(static_cast<int>(k));
        redexes(e->args[k], A, path, out);
        path.pop_back();
    }
}

}  // namespace detail

struct Simplified {
    Expr result;
    std::vector<Step> trace;
};

inline Simplified simplify(const Expr& e, const Assumptions& A = {}, const SimplifyOptions& o = {}) {
    Simplified out;
    if (o.strategy == Strategy::innermost) {
        detail::Innermost run(A, o, out.trace);
        out.result = run.run(e);
        return out;
    }
    std::mt19937_64 rng(o.seed);
    Expr cur = e;
    size_t steps = 0;
    for (;;) {
        std::vector<std::vector<int>> pos;
        std::vector<int> path;
        detail::redexes(cur, A, path, pos);
        if (pos.empty()) break;
        if (++steps > o.step_limit) throw StepLimitExceeded();
        const auto& p = o.strategy == Strategy::outermost ? pos.front() : pos[rng() % pos.size()];
        auto hit = first_rule(subexpr(cur, p), A);
        Expr next = replace_at(cur, p, hit->second);
        if (o.record) out.trace.push_back({hit->first, p, cur, next});
        cur = next;
    }
    out.result = cur;
    return out;
}

// Exact evaluation of closed rational expressions (no symbols); empty when a
// subterm is irrational, undefined, or symbolic.
inline std::optional<Rational> evaluate_exact(const Expr& e) {
    auto all = [&](std::vector<Rational>& v) {
        for (auto& a : e->args) {
            auto r = evaluate_exact(a);
            if (!r) return false;
            v.push_back(*r);
        }
        return true;
    };
    std::vector<Rational> v;
    try {
        switch (e->op) {
        case Op::num: return e->value;
        case Op::add: {
            if (!all(v)) return std::nullopt;
            Rational s(0);
            for (auto& x : v) s = s + x;
            return s;
        }
        case Op::mul: {
            if (!all(v)) return std::nullopt;
            Rational s(1);
            for (auto& x : v) s = s * x;
            return s;
        }
        case Op::pow: {
            if (!all(v) || !v[1].is_integer()) return std::nullopt;
            if (v[0].is_zero() && v[1].sign() <= 0) return std::nullopt;
            return v[0].pow(v[1].num());
        }
        case Op::abs: {
            if (!all(v)) return std::nullopt;
            return v[0].sign() < 0 ? -v[0] : v[0];
        }
        case Op::min:
        case Op::max: {
            if (!all(v)) return std::nullopt;
            Rational b = v[0];
            for (auto& x : v)
                if (e->op == Op::min ? x < b : b < x) b = x;
            return b;
        }
        case Op::lt:
        case Op::le: {
            if (!all(v)) return std::nullopt;
            bool t = e->op == Op::lt ? v[0] < v[1] : v[0] <= v[1];
            return Rational(t ? 1 : 0);
        }
        case Op::piecewise: {
            auto g = evaluate_exact(e->args[0]);
            if (!g) return std::nullopt;
            return evaluate_exact(e->args[g->is_zero() ? 2 : 1]);
        }
        case Op::sinh:
        case Op::arcsinh:
        case Op::tanh:
        case Op::sin: {
            auto a = evaluate_exact(e->args[0]);
            if (a && a->is_zero()) return Rational(0);
            return std::nullopt;
        }
        case Op::cosh:
        case Op::cos: {
            auto a = evaluate_exact(e->args[0]);
            if (a && a->is_zero()) return Rational(1);
            return std::nullopt;
        }
        default: return std::nullopt;
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace beacons::sym
