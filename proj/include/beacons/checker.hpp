// Independent replay of proof certificates. Uses only the rule table, the
// expression matcher (subexpr / replace_at / substitute) and the sign
// procedure that rule side conditions already depend on.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proof.hpp"

namespace beacons::sym {

struct CheckResult {
    bool accepted = false;
    long failing_step = -1;  // -1: certificate-level failure or accepted
    std::string reason;
};

namespace checker {

// Leftmost-innermost redex: first position in post-order where a rule fires.
inline std::optional<std::vector<int>> first_redex(const Expr& e, const Assumptions& A, std::vector<int>& path) {
    for (size_t k = 0; k < e->args.size(); ++k) {
        path.push_back(static_cast<int>(k));
        if (auto p = first_redex(e->args[k], A, path)) return p;
        path.pop_back();
    }
    for (auto& r : rules())
        if (r.apply(e, A)) return path;
    return std::nullopt;
}

inline bool normal(const Expr& e, const Assumptions& A) {
    std::vector<int> p;
    return !first_redex(e, A, p);
}

inline CheckResult reject(long step, std::string why) { return {false, step, std::move(why)}; }

}  // namespace checker

inline CheckResult check_certificate(const ProofCertificate& c) {
    using namespace checker;
    const auto& A = c.assumptions;
    if (c.step_count != c.steps.size()) return reject(-1, "step_count mismatch");
    if (!c.lhs) return reject(-1, "missing goal");

    if (c.goal == GoalKind::numeric) {
        if (c.steps.size() != 2 * c.samples.size()) return reject(-1, "numeric step count");
        bool ok = true;
        for (size_t s = 0; s < c.samples.size(); ++s) {
            std::optional<Rational> v[2];
            for (int k = 0; k < 2; ++k) {
                long idx = static_cast<long>(2 * s + k);
                const auto& st = c.steps[idx];
                if (st.kind != StepKind::numeric) return reject(idx, "expected a numeric step");
                if (st.side != (k == 0 ? "lhs" : "rhs")) return reject(idx, "side mismatch");
                if (!equal(st.before, k == 0 ? c.lhs : c.rhs)) return reject(idx, "before does not match goal");
                std::map<std::string, Expr> b{{c.variable, num(c.samples[s])}};
                if (st.bindings.size() != 1 || !equal(st.bindings.begin()->second, b.begin()->second) ||
                    st.bindings.begin()->first != c.variable)
                    return reject(idx, "sample binding mismatch");
                if (!equal(st.after, substitute(st.before, b))) return reject(idx, "after is not the substitution");
                v[k] = evaluate_exact(st.after);
                if (v[k] && !(*v[k] == st.value)) return reject(idx, "recorded value is wrong");
                if (!v[k] && !(st.value == Rational(0))) return reject(idx, "value recorded for undefined point");
                ok = ok && v[k].has_value();
            }
            if (v[0] && v[1]) ok = ok && (c.relation == "eq" ? *v[0] == *v[1] : *v[0] <= *v[1]);
        }
        if (ok != c.proved) return reject(-1, "status does not match replay");
        return {true, -1, ""};
    }

    Expr cur[2] = {c.lhs, c.rhs};
    bool started[2] = {false, false};
    bool positivity_seen = false;
    for (size_t i = 0; i < c.steps.size(); ++i) {
        const long idx = static_cast<long>(i);
        const auto& st = c.steps[i];
        if (positivity_seen) return reject(idx, "step after positivity check");
        int s = st.side == "lhs" ? 0 : st.side == "rhs" ? 1 : -1;
        if (s < 0 || !cur[s]) return reject(idx, "bad side");
        if (s == 0 && started[1]) return reject(idx, "lhs step after rhs steps");
        if (!st.before || !equal(st.before, cur[s])) return reject(idx, "before does not match current expression");
        switch (st.kind) {
        case StepKind::substitute: {
            if (started[s]) return reject(idx, "substitution after rewriting");
            for (auto& [k, v] : st.bindings) {
                auto it = c.definitions.find(k);
                if (it == c.definitions.end() || !equal(it->second, v)) return reject(idx, "binding is not a definition");
            }
            if (!equal(st.after, substitute(st.before, st.bindings))) return reject(idx, "substitution mismatch");
            break;
        }
        case StepKind::rewrite: {
            std::vector<int> p;
            auto at = first_redex(st.before, A, p);
            if (!at) return reject(idx, "no rule applies");
            if (*at != st.path) return reject(idx, "not the leftmost-innermost redex");
            const Expr sub = subexpr(st.before, st.path);
            const Rule* fired = nullptr;
            std::optional<Expr> out;
            for (auto& r : rules())
                if ((out = r.apply(sub, A))) {
                    fired = &r;
                    break;
                }
            if (!fired || fired->name != st.rule) return reject(idx, "rule is not the first applicable one");
            if (!equal(st.after, replace_at(st.before, st.path, *out))) return reject(idx, "after does not replay");
            break;
        }
        case StepKind::positivity: {
            if (c.goal != GoalKind::positive && c.goal != GoalKind::nonneg) return reject(idx, "unexpected positivity step");
            if (st.rule != to_string(c.goal == GoalKind::positive ? Pred::positive : Pred::nonneg))
                return reject(idx, "predicate does not match goal");
            if (!equal(st.after, st.before)) return reject(idx, "positivity step changes the expression");
            if (!normal(st.before, A)) return reject(idx, "positivity check before normal form");
            bool holds = c.goal == GoalKind::positive ? is_positive(st.before, A) : is_nonneg(st.before, A);
            if (holds != c.proved) return reject(idx, "positivity result does not match status");
            positivity_seen = true;
            break;
        }
        default: return reject(idx, "unexpected step kind");
        }
        if (st.kind != StepKind::positivity) started[s] = true;
        cur[s] = st.after;
    }
    if (c.goal == GoalKind::equal) {
        if (!c.rhs) return reject(-1, "missing rhs");
        if (!normal(cur[0], A) || !normal(cur[1], A)) return reject(-1, "trace stops before normal form");
        if (equal(cur[0], cur[1]) != c.proved) return reject(-1, "status does not match replay");
    } else {
        if (!positivity_seen) return reject(-1, "missing positivity step");
    }
    return {true, -1, ""};
}

}  // namespace beacons::sym
