// Immutable symbolic expressions over exact rationals, with a prefix
// s-expression wire format.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace beacons::sym {

class Rational {
public:
    Rational(int64_t n = 0, int64_t d = 1) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        set(static_cast<__int128>(n), static_cast<__int128>(d));
    }
    int64_t num() const { return n_; }
    int64_t den() const { return d_; }
    bool is_integer() const { return d_ == 1; }
    bool is_zero() const { return n_ == 0; }
    int sign() const { return (n_ > 0) - (n_ < 0); }
    double to_double() const { return static_cast<double>(n_) / static_cast<double>(d_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make((__int128)a.n_ * b.d_ + (__int128)b.n_ * a.d_, (__int128)a.d_ * b.d_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make((__int128)a.n_ * b.d_ - (__int128)b.n_ * a.d_, (__int128)a.d_ * b.d_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make((__int128)a.n_ * b.n_, (__int128)a.d_ * b.d_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.n_ == 0) throw std::domain_error("rational division by zero");
        return make((__int128)a.n_ * b.d_, (__int128)a.d_ * b.n_);
    }
    Rational operator-() const { return make(-(__int128)n_, d_); }
    friend bool operator==(const Rational& a, const Rational& b) { return a.n_ == b.n_ && a.d_ == b.d_; }
    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.n_ * b.d_ < (__int128)b.n_ * a.d_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

    Rational pow(int64_t k) const {
        if (k < 0) {
            if (n_ == 0) throw std::domain_error("zero to a negative power");
            return Rational(1) / pow(-k);
        }
        Rational r(1), b = *this;
        while (k) {
            if (k & 1) r = r * b;
            k >>= 1;
            if (k) b = b * b;
        }
        return r;
    }

    std::string str() const {
        return d_ == 1 ? std::to_string(n_) : std::to_string(n_) + "/" + std::to_string(d_);
    }

private:
    static Rational make(__int128 n, __int128 d) {
        Rational r;
        r.set(n, d);
        return r;
    }
    void set(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        const __int128 lim = INT64_MAX;
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
        n_ = static_cast<int64_t>(n);
        d_ = static_cast<int64_t>(d);
    }
    int64_t n_ = 0, d_ = 1;
};

enum class Op {
    num,
    sym,
    inf,  // signed infinity marker (value holds the sign)
    add,
    mul,
    pow,
    sqrt,
    abs,
    min,
    max,
    sinh,
    cosh,
    arcsinh,
    tanh,
    sin,
    cos,
    piecewise,  // (piecewise guard then else)
    lt,
    le,
};

inline const char* op_name(Op op) {
    switch (op) {
    case Op::num: return "num";
    case Op::sym: return "sym";
    case Op::inf: return "inf";
    case Op::add: return "+";
    case Op::mul: return "*";
    case Op::pow: return "^";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::min: return "min";
    case Op::max: return "max";
    case Op::sinh: return "sinh";
    case Op::cosh: return "cosh";
    case Op::arcsinh: return "arcsinh";
    case Op::tanh: return "tanh";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::piecewise: return "piecewise";
    case Op::lt: return "<";
    case Op::le: return "<=";
    }
    return "?";
}

// Fixed arity, or -1 for n-ary (>= 1 argument).
inline int op_arity(Op op) {
    switch (op) {
    case Op::num:
    case Op::sym:
    case Op::inf: return 0;
    case Op::add:
    case Op::mul:
    case Op::min:
    case Op::max: return -1;
    case Op::pow:
    case Op::lt:
    case Op::le: return 2;
    case Op::piecewise: return 3;
    default: return 1;
    }
}

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    Rational value;
    std::string name;
    std::vector<Expr> args;
};

inline Expr make_node(Op op, std::vector<Expr> args) {
    int ar = op_arity(op);
    if (ar >= 0 && static_cast<int>(args.size()) != ar)
        throw std::invalid_argument(std::string("arity mismatch for ") + op_name(op));
    if (ar < 0 && args.empty()) throw std::invalid_argument(std::string("no arguments for ") + op_name(op));
    return std::make_shared<const Node>(Node{op, Rational(0), "", std::move(args)});
}

inline Expr num(Rational r) { return std::make_shared<const Node>(Node{Op::num, r, "", {}}); }
inline Expr num(int64_t n, int64_t d = 1) { return num(Rational(n, d)); }
inline Expr symbol(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        throw std::invalid_argument("bad symbol name: " + s);
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            throw std::invalid_argument("bad symbol name: " + s);
    return std::make_shared<const Node>(Node{Op::sym, Rational(0), s, {}});
}
inline Expr infinity(int sign) { return std::make_shared<const Node>(Node{Op::inf, Rational(sign), "", {}}); }

inline bool is_num(const Expr& e) { return e->op == Op::num; }
inline bool is_num(const Expr& e, int64_t v) { return e->op == Op::num && e->value == Rational(v); }

inline Expr add(std::vector<Expr> a) { return make_node(Op::add, std::move(a)); }
inline Expr mul(std::vector<Expr> a) { return make_node(Op::mul, std::move(a)); }
inline Expr add(Expr a, Expr b) { return add(std::vector<Expr>{a, b}); }
inline Expr mul(Expr a, Expr b) { return mul(std::vector<Expr>{a, b}); }
inline Expr neg(Expr a) { return mul(num(-1), a); }
inline Expr sub(Expr a, Expr b) { return add(a, neg(b)); }
inline Expr pow(Expr a, Expr b) { return make_node(Op::pow, {a, b}); }
inline Expr pow(Expr a, Rational k) { return pow(a, num(k)); }
inline Expr inv(Expr a) { return pow(a, num(-1)); }
inline Expr div(Expr a, Expr b) { return mul(a, inv(b)); }
inline Expr fn(Op op, Expr a) { return make_node(op, {a}); }
inline Expr sqrt(Expr a) { return fn(Op::sqrt, a); }
inline Expr abs(Expr a) { return fn(Op::abs, a); }
inline Expr min(std::vector<Expr> a) { return make_node(Op::min, std::move(a)); }
inline Expr max(std::vector<Expr> a) { return make_node(Op::max, std::move(a)); }
inline Expr piecewise(Expr guard, Expr then, Expr otherwise) { return make_node(Op::piecewise, {guard, then, otherwise}); }
inline Expr lt(Expr a, Expr b) { return make_node(Op::lt, {a, b}); }
inline Expr le(Expr a, Expr b) { return make_node(Op::le, {a, b}); }

inline Expr with_args(const Expr& e, std::vector<Expr> args) { return make_node(e->op, std::move(args)); }

// Total order used for canonical argument ordering.
inline int compare(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return 0;
    if (a->op != b->op) return a->op < b->op ? -1 : 1;
    switch (a->op) {
    case Op::num:
    case Op::inf:
        if (a->value == b->value) return 0;
        return a->value < b->value ? -1 : 1;
    case Op::sym: return a->name < b->name ? -1 : (a->name == b->name ? 0 : 1);
    default: break;
    }
    size_t n = std::min(a->args.size(), b->args.size());
    for (size_t k = 0; k < n; ++k)
        if (int c = compare(a->args[k], b->args[k])) return c;
    if (a->args.size() == b->args.size()) return 0;
    return a->args.size() < b->args.size() ? -1 : 1;
}

inline bool equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

inline size_t size(const Expr& e) {
    size_t s = 1;
    for (auto& a : e->args) s += size(a);
    return s;
}

inline size_t depth(const Expr& e) {
    size_t d = 0;
    for (auto& a : e->args) d = std::max(d, depth(a));
    return d + 1;
}

inline std::string to_string(const Expr& e) {
    switch (e->op) {
    case Op::num: return e->value.str();
    case Op::sym: return e->name;
    case Op::inf: return e->value.sign() > 0 ? "inf" : "-inf";
    default: break;
    }
    std::string s = "(";
    s += op_name(e->op);
    for (auto& a : e->args) s += " " + to_string(a);
    return s + ")";
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    Expr parse() {
        Expr e = expr();
        skip();
        if (p_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("parse error at " + std::to_string(p_) + ": " + msg);
    }
    void skip() {
        while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
    }
    std::string token() {
        skip();
        size_t b = p_;
        while (p_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[p_])) && s_[p_] != '(' && s_[p_] != ')')
            ++p_;
        if (b == p_) fail("expected token");
        return s_.substr(b, p_ - b);
    }
    static bool numeric(const std::string& t) {
        size_t k = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (k >= t.size()) return false;
        bool slash = false;
        for (; k < t.size(); ++k) {
            if (t[k] == '/' && !slash && k + 1 < t.size()) {
                slash = true;
                continue;
            }
            if (!std::isdigit(static_cast<unsigned char>(t[k]))) return false;
        }
        return true;
    }
    Expr atom(const std::string& t) {
        if (t == "inf") return infinity(1);
        if (t == "-inf") return infinity(-1);
        if (numeric(t)) {
            auto sl = t.find('/');
            try {
                if (sl == std::string::npos) return num(std::stoll(t));
                return num(Rational(std::stoll(t.substr(0, sl)), std::stoll(t.substr(sl + 1))));
            } catch (const std::out_of_range&) {
                fail("number out of range");
            } catch (const std::domain_error&) {
                fail("zero denominator");
            }
        }
        return symbol(t);
    }
    Expr expr() {
        skip();
        if (p_ >= s_.size()) fail("unexpected end");
        if (s_[p_] == ')') fail("unexpected ')'");
        if (s_[p_] != '(') return atom(token());
        ++p_;
        std::string head = token();
        std::vector<Expr> args;
        for (;;) {
            skip();
            if (p_ >= s_.size()) fail("unclosed '('");
            if (s_[p_] == ')') {
                ++p_;
                break;
            }
            args.push_back(expr());
        }
        if (head == "-") {
            if (args.size() == 1) return neg(args[0]);
            if (args.size() == 2) return sub(args[0], args[1]);
            fail("'-' takes 1 or 2 arguments");
        }
        if (head == "/") {
            if (args.size() != 2) fail("'/' takes 2 arguments");
            return div(args[0], args[1]);
        }
        for (int k = static_cast<int>(Op::add); k <= static_cast<int>(Op::le); ++k) {
            Op op = static_cast<Op>(k);
            if (head == op_name(op)) {
                try {
                    return make_node(op, std::move(args));
                } catch (const std::invalid_argument& e) {
                    fail(e.what());
                }
            }
        }
        fail("unknown operator " + head);
    }

    std::string s_;
    size_t p_ = 0;
};

inline Expr parse(const std::string& text) { return Parser(text).parse(); }

inline Expr subexpr(const Expr& e, const std::vector<int>& path) {
    Expr cur = e;
    for (int k : path) {
        if (k < 0 || k >= static_cast<int>(cur->args.size())) throw std::out_of_range("bad expression path");
        cur = cur->args[k];
    }
    return cur;
}

inline Expr replace_at(const Expr& e, const std::vector<int>& path, size_t level, const Expr& repl) {
    if (level == path.size()) return repl;
    int k = path[level];
    if (k < 0 || k >= static_cast<int>(e->args.size())) throw std::out_of_range("bad expression path");
    auto args = e->args;
    args[k] = replace_at(e->args[k], path, level + 1, repl);
    return with_args(e, std::move(args));
}

inline Expr replace_at(const Expr& e, const std::vector<int>& path, const Expr& repl) {
    return replace_at(e, path, 0, repl);
}

inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& env) {
    if (e->op == Op::sym) {
        auto it = env.find(e->name);
        return it == env.end() ? e : it->second;
    }
    if (e->args.empty()) return e;
    std::vector<Expr> args;
    for (auto& a : e->args) args.push_back(substitute(a, env));
    return with_args(e, std::move(args));
}

inline void collect_symbols(const Expr& e, std::set<std::string>& out) {
    if (e->op == Op::sym) out.insert(e->name);
    for (auto& a : e->args) collect_symbols(a, out);
}

// Floating-point evaluation; guards evaluate to 1 or 0.
inline double evaluate(const Expr& e, const std::map<std::string, double>& env) {
    auto A = [&](size_t k) { return evaluate(e->args[k], env); };
    switch (e->op) {
    case Op::num: return e->value.to_double();
    case Op::inf: return e->value.sign() * INFINITY;
    case Op::sym: {
        auto it = env.find(e->name);
        if (it == env.end()) throw std::invalid_argument("unbound symbol " + e->name);
        return it->second;
    }
    case Op::add: {
        double s = 0;
        for (size_t k = 0; k < e->args.size(); ++k) s += A(k);
        return s;
    }
    case Op::mul: {
        double s = 1;
        for (size_t k = 0; k < e->args.size(); ++k) s *= A(k);
        return s;
    }
    case Op::pow: {
        double b = A(0), x = A(1);
        // odd-denominator roots of negatives stay real
        if (b < 0 && e->args[1]->op == Op::num && !e->args[1]->value.is_integer() && e->args[1]->value.den() % 2 == 1) {
            double r = std::pow(-b, x);
            return e->args[1]->value.num() % 2 ? -r : r;
        }
        return std::pow(b, x);
    }
    case Op::sqrt: return std::sqrt(A(0));
    case Op::abs: return std::abs(A(0));
    case Op::min:
    case Op::max: {
        double m = A(0);
        for (size_t k = 1; k < e->args.size(); ++k) {
            double v = A(k);
            if (std::isnan(v)) return v;
            m = e->op == Op::min ? std::min(m, v) : std::max(m, v);
        }
        return m;
    }
    case Op::sinh: return std::sinh(A(0));
    case Op::cosh: return std::cosh(A(0));
    case Op::arcsinh: return std::asinh(A(0));
    case Op::tanh: return std::tanh(A(0));
    case Op::sin: return std::sin(A(0));
    case Op::cos: return std::cos(A(0));
    case Op::piecewise: return A(0) != 0.0 ? A(1) : A(2);
    case Op::lt: return A(0) < A(1) ? 1.0 : 0.0;
    case Op::le: return A(0) <= A(1) ? 1.0 : 0.0;
    }
    return NAN;
}

}  // namespace beacons::sym
