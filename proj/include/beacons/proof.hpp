// Equational proof certificates: goals, traces, JSON wire format.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "rewrite.hpp"

namespace beacons::sym {

enum class StepKind { rewrite, substitute, positivity, numeric };

inline std::string to_string(StepKind k) {
    switch (k) {
    case StepKind::rewrite: return "rewrite";
    case StepKind::substitute: return "substitute";
    case StepKind::positivity: return "positivity";
    case StepKind::numeric: return "numeric";
    }
    return "?";
}

inline StepKind step_kind_from_string(const std::string& s) {
    for (auto k : {StepKind::rewrite, StepKind::substitute, StepKind::positivity, StepKind::numeric})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown step kind " + s);
}

enum class GoalKind { equal, positive, nonneg, numeric };

inline std::string to_string(GoalKind k) {
    switch (k) {
    case GoalKind::equal: return "equal";
    case GoalKind::positive: return "positive";
    case GoalKind::nonneg: return "nonneg";
    case GoalKind::numeric: return "numeric";
    }
    return "?";
}

inline GoalKind goal_kind_from_string(const std::string& s) {
    for (auto k : {GoalKind::equal, GoalKind::positive, GoalKind::nonneg, GoalKind::numeric})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown goal kind " + s);
}

struct ProofStep {
    StepKind kind = StepKind::rewrite;
    std::string side = "lhs";  // lhs | rhs
    std::string rule;          // rewrite rule, or predicate for positivity
    std::vector<int> path;
    Expr before, after;
    std::map<std::string, Expr> bindings;  // substitute; numeric sample point
    Rational value;                        // numeric
};

struct ProofCertificate {
    std::string name;
    GoalKind goal = GoalKind::equal;
    Expr lhs, rhs;                    // rhs unused for predicate goals
    std::string relation = "eq";      // numeric goals: eq | le
    std::string variable;             // numeric goals: sampled symbol
    std::vector<Rational> samples;    // numeric goals
    Assumptions assumptions;
    std::map<std::string, Expr> definitions;
    std::vector<ProofStep> steps;
    bool proved = false;
    size_t step_count = 0;
    std::string footer =
        "rules are sound over the reals under their side conditions; floating-point execution may deviate within "
        "rounding";

    bool numeric_evidence() const { return goal == GoalKind::numeric; }
};

namespace detail {

inline Expr trace_side(const Expr& start, const std::string& side, const Assumptions& A,
                       const std::map<std::string, Expr>& defs, std::vector<ProofStep>& out) {
    Expr cur = start;
    if (!defs.empty()) {
        Expr s = substitute(cur, defs);
        if (!equal(s, cur)) {
            ProofStep st;
            st.kind = StepKind::substitute;
            st.side = side;
            st.before = cur;
            st.after = s;
            std::set<std::string> used;
            collect_symbols(cur, used);
            for (auto& [k, v] : defs)
                if (used.count(k)) st.bindings[k] = v;
            out.push_back(st);
            cur = s;
        }
    }
    auto r = simplify(cur, A);
    for (auto& t : r.trace) {
        ProofStep st;
        st.side = side;
        st.rule = t.rule;
        st.path = t.path;
        st.before = t.before;
        st.after = t.after;
        out.push_back(st);
    }
    return r.result;
}

}  // namespace detail

// Proved iff both sides reach the same normal form.
inline ProofCertificate prove_equal(const std::string& name, const Expr& lhs, const Expr& rhs,
                                    const Assumptions& A = {}, const std::map<std::string, Expr>& defs = {}) {
    ProofCertificate c;
    c.name = name;
    c.goal = GoalKind::equal;
    c.lhs = lhs;
    c.rhs = rhs;
    c.assumptions = A;
    c.definitions = defs;
    Expr l = detail::trace_side(lhs, "lhs", A, defs, c.steps);
    Expr r = detail::trace_side(rhs, "rhs", A, defs, c.steps);
    c.proved = equal(l, r);
    c.step_count = c.steps.size();
    return c;
}

// positive(e) or nonneg(e): normalize, then discharge by sign reasoning.
inline ProofCertificate prove_predicate(const std::string& name, const Expr& e, Pred p, const Assumptions& A = {},
                                        const std::map<std::string, Expr>& defs = {}) {
    if (p != Pred::positive && p != Pred::nonneg) throw std::invalid_argument("prove_predicate: positive or nonneg");
    ProofCertificate c;
    c.name = name;
    c.goal = p == Pred::positive ? GoalKind::positive : GoalKind::nonneg;
    c.lhs = e;
    c.assumptions = A;
    c.definitions = defs;
    Expr nf = detail::trace_side(e, "lhs", A, defs, c.steps);
    bool ok = p == Pred::positive ? is_positive(nf, A) : is_nonneg(nf, A);
    ProofStep st;
    st.kind = StepKind::positivity;
    st.rule = to_string(p);
    st.before = st.after = nf;
    c.steps.push_back(st);
    c.proved = ok;
    c.step_count = c.steps.size();
    return c;
}

// Sampled evidence: lhs (eq|le) rhs at each sample of one variable, by exact
// rational evaluation.
inline ProofCertificate numeric_evidence(const std::string& name, const Expr& lhs, const Expr& rhs,
                                         const std::string& relation, const std::string& var,
                                         const std::vector<Rational>& samples) {
    if (relation != "eq" && relation != "le") throw std::invalid_argument("numeric relation must be eq or le");
    ProofCertificate c;
    c.name = name;
    c.goal = GoalKind::numeric;
    c.lhs = lhs;
    c.rhs = rhs;
    c.relation = relation;
    c.variable = var;
    c.samples = samples;
    bool ok = true;
    for (auto& s : samples) {
        std::optional<Rational> v[2];
        int k = 0;
        for (auto side : {"lhs", "rhs"}) {
            ProofStep st;
            st.kind = StepKind::numeric;
            st.side = side;
            st.bindings = {{var, num(s)}};
            st.before = k == 0 ? lhs : rhs;
            st.after = substitute(st.before, st.bindings);
            v[k] = evaluate_exact(st.after);
            st.value = v[k].value_or(Rational(0));
            ok = ok && v[k].has_value();
            c.steps.push_back(st);
            ++k;
        }
        if (v[0] && v[1]) ok = ok && (relation == "eq" ? *v[0] == *v[1] : *v[0] <= *v[1]);
    }
    c.proved = ok;
    c.step_count = c.steps.size();
    return c;
}

// ---- JSON ----

inline nlohmann::json bindings_json(const std::map<std::string, Expr>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (auto& [k, v] : m) j[k] = to_string(v);
    return j;
}

inline std::map<std::string, Expr> bindings_from_json(const nlohmann::json& j) {
    std::map<std::string, Expr> m;
    for (auto& [k, v] : j.items()) m[k] = parse(v.get<std::string>());
    return m;
}

inline nlohmann::json to_json(const ProofCertificate& c) {
    using nlohmann::json;
    json j;
    j["kind"] = "proof";
    j["name"] = c.name;
    j["goal"] = {{"kind", to_string(c.goal)}, {"lhs", to_string(c.lhs)}};
    if (c.rhs) j["goal"]["rhs"] = to_string(c.rhs);
    if (c.goal == GoalKind::numeric) {
        j["goal"]["relation"] = c.relation;
        j["goal"]["variable"] = c.variable;
        json s = json::array();
        for (auto& r : c.samples) s.push_back(r.str());
        j["goal"]["samples"] = s;
    }
    json a = json::object();
    for (auto& [sym, preds] : c.assumptions.facts) {
        json p = json::array();
        for (auto q : preds) p.push_back(to_string(q));
        a[sym] = p;
    }
    j["assumptions"] = a;
    j["definitions"] = bindings_json(c.definitions);
    json steps = json::array();
    for (auto& s : c.steps) {
        json t;
        t["kind"] = to_string(s.kind);
        t["side"] = s.side;
        if (!s.rule.empty()) t["rule"] = s.rule;
        if (s.kind == StepKind::rewrite) t["path"] = s.path;
        t["before"] = to_string(s.before);
        t["after"] = to_string(s.after);
        if (!s.bindings.empty()) t["bindings"] = bindings_json(s.bindings);
        if (s.kind == StepKind::numeric) t["value"] = s.value.str();
        steps.push_back(t);
    }
    j["trace"] = steps;
    j["status"] = c.proved ? "proved" : "failed";
    j["step_count"] = c.step_count;
    j["footer"] = c.footer;
    return j;
}

inline Rational rational_from_string(const std::string& s) {
    auto e = parse(s);
    if (!is_num(e)) throw std::invalid_argument("expected a rational: " + s);
    return e->value;
}

// Rebuilds e reusing every subtree of base it has in common, so a trace of
// local rewrites of one large expression does not hold a full copy per step.
inline Expr share_with(const Expr& e, const Expr& base) {
    if (e == base) return e;
    if (e->op != base->op || e->args.size() != base->args.size()) return e;
    if (e->args.empty()) return equal(e, base) ? base : e;
    std::vector<Expr> args(e->args.size());
    bool all_base = true;
    for (size_t i = 0; i < args.size(); ++i) {
        args[i] = share_with(e->args[i], base->args[i]);
        all_base = all_base && args[i] == base->args[i];
    }
    if (all_base && e->value == base->value && e->name == base->name) return base;
    return std::make_shared<const Node>(Node{e->op, e->value, e->name, std::move(args)});
}

inline ProofCertificate proof_from_json(const nlohmann::json& j) {
    ProofCertificate c;
    try {
        if (j.at("kind") != "proof") throw std::invalid_argument("not a proof certificate");
        c.name = j.at("name");
        auto& g = j.at("goal");
        c.goal = goal_kind_from_string(g.at("kind"));
        c.lhs = parse(g.at("lhs").get<std::string>());
        if (g.contains("rhs")) c.rhs = parse(g.at("rhs").get<std::string>());
        if (c.goal == GoalKind::numeric) {
            c.relation = g.at("relation");
            c.variable = g.at("variable");
            for (auto& s : g.at("samples")) c.samples.push_back(rational_from_string(s));
        }
        for (auto& [sym, preds] : j.at("assumptions").items())
            for (auto& p : preds) c.assumptions.assume(sym, pred_from_string(p));
        c.definitions = bindings_from_json(j.at("definitions"));
        const std::string* prev_after = nullptr;
        for (auto& t : j.at("trace")) {
            ProofStep s;
            s.kind = step_kind_from_string(t.at("kind"));
            s.side = t.at("side");
            if (t.contains("rule")) s.rule = t.at("rule");
            if (t.contains("path")) s.path = t.at("path").get<std::vector<int>>();
            const auto& before = t.at("before").get_ref<const std::string&>();
            const auto& after = t.at("after").get_ref<const std::string&>();
            if (prev_after && before == *prev_after) {
                s.before = c.steps.back().after;
            } else {
                s.before = parse(before);
                if (!c.steps.empty()) s.before = share_with(s.before, c.steps.back().after);
            }
            s.after = after == before ? s.before : share_with(parse(after), s.before);
            prev_after = &after;
            if (t.contains("bindings")) s.bindings = bindings_from_json(t.at("bindings"));
            if (t.contains("value")) s.value = rational_from_string(t.at("value"));
            c.steps.push_back(s);
        }
        c.proved = j.at("status") == "proved";
        c.step_count = j.at("step_count");
        if (j.contains("footer")) c.footer = j.at("footer");
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed proof certificate: ") + e.what());
    }
    return c;
}

}  // namespace beacons::sym
