// Bound certificates: construction, JSON form and bit-exact replay checking.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bounds.hpp"
#include "candidate.hpp"
#include "characteristics.hpp"
#include "json17.hpp"

namespace beacons {

struct CertificateRefused : std::runtime_error {
    std::string code;
    CertificateRefused(std::string c, const std::string& what) : std::runtime_error(what), code(std::move(c)) {}
};

struct BoundCertificate {
    int version = 1;
    std::string problem;
    ArchitectureSpec arch;
    SmoothnessReport smoothness;
    int d_in = 1;
    bool conditional = false;
    bool informational = false;
    std::vector<std::string> assumptions;
    std::vector<std::string> warnings;
    int component = 0;
    double target_lo = 0.0, target_hi = 1.0;  // the head's [0, 1] maps onto this range
    CompositionChain chain;
    std::vector<DerivationStep> derivation;
    double bound_smooth = 0.0;
    std::optional<double> bound_nonsmooth;
    std::string no_bound_reason;
    int step_count = 0;
    nlohmann::json search;  // candidate report, not replayed

    // The bound the measured all-frame error must respect.
    std::optional<double> governing_bound() const {
        if (smoothness.discontinuity_count > 0 && smoothness.classification != Classification::smooth_forever)
            return bound_nonsmooth;
        return bound_smooth;
    }
};

struct CertifyRequest {
    std::string problem;
    ArchitectureSpec arch;
    SmoothnessReport report;
    int d_in = 1;
    bool conditional = false;
    int component = 0;
    double target_lo = 0.0, target_hi = 1.0;
    std::vector<AnalyticMap> maps;  // beacons: layers - 1 maps in application order
    std::vector<std::string> warnings;
    nlohmann::json search;
};

inline const char* kNoNonsmoothParts = "no non-smooth parts";
inline const char* kAsymptoticallyEmpty = "discontinuity set is asymptotically empty";
inline const char* kTrainingDataAssumption = "training-data correctness assumed";

// Head orders (smooth, non-smooth) and the no-bound reason implied by a report.
struct HeadOrders {
    int smooth = 0, nonsmooth = 0;
    std::string no_bound;
};

inline HeadOrders head_orders(const SmoothnessReport& r) {
    HeadOrders h;
    h.smooth = r.n;
    h.nonsmooth = 0;
    if (r.classification == Classification::smooth_forever) h.no_bound = kNoNonsmoothParts;
    if (r.classification == Classification::asymptotically_smooth) h.no_bound = kAsymptoticallyEmpty;
    // Linear transport of a jump: the smooth parts never separate from it.
    if (r.linear_flux && r.discontinuity_count > 0) h.smooth = 0;
    return h;
}

inline CompositionChain beacons_chain(const ArchitectureSpec& arch, int d_in, const HeadOrders& h,
                                      const std::vector<AnalyticMap>& maps) {
    CompositionChain c;
    c.stages.push_back(ChainStage::learned_stage(arch.width, h.smooth, d_in, true, h.nonsmooth));
    c.stages.push_back(ChainStage::rescale_stage(2.0, -1.0));
    for (const auto& m : maps) {
        c.stages.push_back(ChainStage::rescale_stage(m.domain(), 0.0));
        c.stages.push_back(ChainStage::analytic_stage(m));
        c.stages.push_back(ChainStage::learned_stage(arch.width, kOrderCap, 1));
    }
    c.stages.push_back(ChainStage::rescale_stage(0.5, 0.5));
    return c;
}

inline CompositionChain plain_chain(const ArchitectureSpec& arch, int d_in, const HeadOrders& h) {
    CompositionChain c;
    c.stages.push_back(ChainStage::learned_stage(static_cast<long>(arch.layers) * arch.width, h.smooth, d_in, true,
                                                 h.nonsmooth));
    return c;
}

inline BoundCertificate certify(const CertifyRequest& q) {
    try {
        q.arch.validate();
    } catch (const std::invalid_argument& e) {
        throw CertificateRefused("invalid_architecture", e.what());
    }
    if (q.d_in < 1 || q.d_in > 3) throw CertificateRefused("invalid_dimension", "input dimension must be 1..3");
    if (!(q.target_hi > q.target_lo)) throw CertificateRefused("invalid_range", "empty target range");
    if (q.arch.kind == ArchKind::beacons && static_cast<int>(q.maps.size()) != q.arch.layers - 1)
        throw CertificateRefused("chain_shape", "beacons chain needs layers - 1 analytic maps");
    BoundCertificate c;
    c.problem = q.problem;
    c.arch = q.arch;
    c.smoothness = q.report;
    c.d_in = q.d_in;
    c.conditional = q.conditional;
    if (q.conditional) c.assumptions.push_back(kTrainingDataAssumption);
    c.informational = q.arch.kind == ArchKind::plain;
    c.warnings = q.warnings;
    c.component = q.component;
    c.target_lo = q.target_lo;
    c.target_hi = q.target_hi;
    c.search = q.search;
    const HeadOrders h = head_orders(q.report);
    c.chain = q.arch.kind == ArchKind::plain ? plain_chain(q.arch, q.d_in, h) : beacons_chain(q.arch, q.d_in, h, q.maps);
    ChainBound b;
    try {
        b = chain_bound(c.chain, h.no_bound);
    } catch (const std::invalid_argument& e) {
        throw CertificateRefused("range_containment", e.what());
    }
    c.derivation = std::move(b.steps);
    c.bound_smooth = b.smooth;
    c.bound_nonsmooth = b.nonsmooth;
    c.no_bound_reason = b.no_bound_reason;
    c.step_count = static_cast<int>(c.derivation.size());
    return c;
}

// ---- JSON ----

namespace detail {

inline nlohmann::json num_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}
inline double num_from(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j == "inf") return std::numeric_limits<double>::infinity();
        if (j == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::invalid_argument("bad number");
    }
    return j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const ChainStage& s) {
    nlohmann::json j{{"kind", to_string(s.kind)}};
    switch (s.kind) {
    case StageKind::learned:
        j["head"] = s.head;
        j["N"] = s.N;
        j["n"] = s.n;
        if (s.head) j["n_nonsmooth"] = s.n_nonsmooth;
        j["d"] = s.d;
        j["rate"] = shallow_rate(s.N, s.n, s.d);
        break;
    case StageKind::analytic:
        j["form"] = to_string(s.map.form);
        j["C"] = s.map.C;
        j["L"] = s.map.lipschitz();
        break;
    case StageKind::rescale:
        j["scale"] = s.scale;
        j["shift"] = s.shift;
        j["L"] = s.lipschitz();
        break;
    }
    return j;
}

inline ChainStage chain_stage_from_json(const nlohmann::json& j) {
    ChainStage s;
    s.kind = stage_kind_from_string(j.at("kind"));
    switch (s.kind) {
    case StageKind::learned:
        s.head = j.at("head");
        s.N = j.at("N");
        s.n = j.at("n");
        s.n_nonsmooth = s.head ? j.at("n_nonsmooth").get<int>() : s.n;
        s.d = j.at("d");
        break;
    case StageKind::analytic:
        s.map.form = map_form_from_string(j.at("form"));
        s.map.C = j.at("C");
        break;
    case StageKind::rescale:
        s.scale = j.at("scale");
        s.shift = j.at("shift");
        break;
    }
    return s;
}

inline nlohmann::json to_json(const BoundCertificate& c) {
    nlohmann::json j;
    j["version"] = c.version;
    j["problem"] = c.problem;
    j["architecture"] = {{"kind", to_string(c.arch.kind)}, {"layers", c.arch.layers}, {"width", c.arch.width}};
    nlohmann::json tinf = nlohmann::json::array();
    for (double t : c.smoothness.t_inf) tinf.push_back(detail::num_or_inf(t));
    j["smoothness"] = {{"classification", to_string(c.smoothness.classification)},
                       {"n", c.smoothness.n},
                       {"n_global", c.smoothness.n_global},
                       {"t_inf", tinf},
                       {"discontinuity_count", c.smoothness.discontinuity_count},
                       {"linear_flux", c.smoothness.linear_flux},
                       {"notes", c.smoothness.notes}};
    j["input_dim"] = c.d_in;
    j["conditional"] = c.conditional;
    j["assumptions"] = c.assumptions;
    j["informational"] = c.informational;
    j["warnings"] = c.warnings;
    j["component"] = c.component;
    j["target_range"] = {c.target_lo, c.target_hi};
    j["chain"] = nlohmann::json::array();
    for (auto& s : c.chain.stages) j["chain"].push_back(to_json(s));
    j["derivation"] = nlohmann::json::array();
    for (auto& d : c.derivation) j["derivation"].push_back({{"rule", d.rule}, {"inputs", d.inputs}, {"output", d.output}});
    j["bound_smooth"] = c.bound_smooth;
    if (c.bound_nonsmooth)
        j["bound_nonsmooth"] = *c.bound_nonsmooth;
    else
        j["bound_nonsmooth"] = {{"no_bound", c.no_bound_reason}};
    j["step_count"] = c.step_count;
    if (!c.search.is_null()) j["search"] = c.search;
    return j;
}

inline BoundCertificate bound_certificate_from_json(const nlohmann::json& j) {
    try {
        BoundCertificate c;
        c.version = j.at("version");
        c.problem = j.at("problem");
        auto& a = j.at("architecture");
        c.arch.kind = a.at("kind") == "plain" ? ArchKind::plain : ArchKind::beacons;
        if (a.at("kind") != "plain" && a.at("kind") != "beacons") throw std::invalid_argument("unknown architecture kind");
        c.arch.layers = a.at("layers");
        c.arch.width = a.at("width");
        auto& s = j.at("smoothness");
        c.smoothness.classification = classification_from_string(s.at("classification"));
        c.smoothness.n = s.at("n");
        c.smoothness.n_global = s.value("n_global", c.smoothness.n);
        for (auto& t : s.at("t_inf")) c.smoothness.t_inf.push_back(detail::num_from(t));
        c.smoothness.discontinuity_count = s.value("discontinuity_count", 0);
        c.smoothness.linear_flux = s.value("linear_flux", false);
        c.smoothness.notes = s.at("notes").get<std::vector<std::string>>();
        c.d_in = j.value("input_dim", 1);
        c.conditional = j.at("conditional");
        c.assumptions = j.value("assumptions", std::vector<std::string>{});
        c.informational = j.value("informational", false);
        c.warnings = j.value("warnings", std::vector<std::string>{});
        c.component = j.value("component", 0);
        if (j.contains("target_range")) {
            c.target_lo = j["target_range"].at(0);
            c.target_hi = j["target_range"].at(1);
        }
        for (auto& st : j.at("chain")) c.chain.stages.push_back(chain_stage_from_json(st));
        for (auto& d : j.at("derivation"))
            c.derivation.push_back({d.at("rule"), d.at("inputs").get<std::vector<double>>(), d.at("output")});
        c.bound_smooth = j.at("bound_smooth");
        auto& ns = j.at("bound_nonsmooth");
        if (ns.is_object())
            c.no_bound_reason = ns.at("no_bound");
        else
            c.bound_nonsmooth = ns.get<double>();
        c.step_count = j.at("step_count");
        if (j.contains("search")) c.search = j["search"];
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed certificate: ") + e.what());
    }
}

inline std::string certificate_text(const BoundCertificate& c) {
    std::string s;
    dump17(to_json(c), s);
    return s + "\n";
}

inline nlohmann::json to_json(const CandidateReport& r) {
    nlohmann::json j;
    j["chosen"] = nlohmann::json::array();
    for (auto& m : r.chosen) j["chosen"].push_back({{"form", to_string(m.form)}, {"C", m.C}});
    j["estimate"] = r.estimate;
    j["warnings"] = r.warnings;
    j["trials"] = nlohmann::json::array();
    for (auto& t : r.trials) {
        nlohmann::json e{{"stage", t.stage}, {"form", to_string(t.map.form)}, {"C", t.map.C}, {"admissible", t.admissible}};
        if (t.admissible) {
            e["L"] = t.map.lipschitz();
            e["e_probe"] = t.e_probe;
            e["estimate"] = t.estimate;
        } else {
            e["reason"] = t.reason;
        }
        if (!t.flag.empty()) e["flag"] = t.flag;
        j["trials"].push_back(std::move(e));
    }
    return j;
}

// ---- replay ----

struct BoundCheck {
    bool accepted = false;
    int failing_step = -1;  // derivation index, or -1 for a structural failure
    std::string reason;
};

namespace detail {

inline bool same(double a, double b) {
    return a == b && std::signbit(a) == std::signbit(b);
}

}  // namespace detail

// Rebuilds the derivation from the chain and the smoothness report and
// compares every step bit for bit, then recomputes each step on its own.
inline BoundCheck check_bound_certificate(const BoundCertificate& c) {
    BoundCheck r;
    auto fail = [&](int step, std::string why) {
        r.accepted = false;
        r.failing_step = step;
        r.reason = std::move(why);
        return r;
    };
    if (c.version != 1) return fail(-1, "unsupported version");
    try {
        c.arch.validate();
    } catch (const std::exception& e) {
        return fail(-1, e.what());
    }
    if (c.conditional != (std::find(c.assumptions.begin(), c.assumptions.end(), kTrainingDataAssumption) !=
                          c.assumptions.end()))
        return fail(-1, "conditional flag and assumptions disagree");
    if (c.informational != (c.arch.kind == ArchKind::plain)) return fail(-1, "informational flag does not match kind");
    if (!(c.target_hi > c.target_lo)) return fail(-1, "empty target range");

    const HeadOrders h = head_orders(c.smoothness);
    // Chain shape must be what certify would build for these maps.
    std::vector<AnalyticMap> maps;
    for (auto& s : c.chain.stages)
        if (s.kind == StageKind::analytic) maps.push_back(s.map);
    if (c.arch.kind == ArchKind::beacons && static_cast<int>(maps.size()) != c.arch.layers - 1)
        return fail(-1, "chain has the wrong number of analytic maps");
    for (auto& m : maps)
        if (auto why = m.inadmissible()) return fail(-1, "inadmissible map: " + *why);
    const CompositionChain expect_chain =
        c.arch.kind == ArchKind::plain ? plain_chain(c.arch, c.d_in, h) : beacons_chain(c.arch, c.d_in, h, maps);
    if (expect_chain.stages.size() != c.chain.stages.size()) return fail(-1, "chain length mismatch");
    for (size_t k = 0; k < expect_chain.stages.size(); ++k) {
        const auto &a = expect_chain.stages[k], &b = c.chain.stages[k];
        const bool eq = a.kind == b.kind && a.head == b.head && a.N == b.N && a.n == b.n &&
                        a.n_nonsmooth == b.n_nonsmooth && a.d == b.d && a.map.form == b.map.form &&
                        detail::same(a.map.C, b.map.C) && detail::same(a.scale, b.scale) &&
                        detail::same(a.shift, b.shift);
        if (!eq) return fail(-1, "chain stage " + std::to_string(k) + " differs from the derived chain");
    }
    ChainBound b;
    try {
        b = chain_bound(c.chain, h.no_bound);
    } catch (const std::invalid_argument& e) {
        return fail(-1, e.what());
    }
    if (static_cast<int>(c.derivation.size()) != c.step_count) return fail(-1, "step_count mismatch");
    if (b.steps.size() != c.derivation.size()) return fail(-1, "derivation length mismatch");
    for (size_t k = 0; k < b.steps.size(); ++k) {
        const auto &e = b.steps[k], &g = c.derivation[k];
        const int i = static_cast<int>(k);
        if (e.rule != g.rule) return fail(i, "rule mismatch: expected " + e.rule);
        if (e.inputs.size() != g.inputs.size()) return fail(i, "arity mismatch");
        for (size_t a = 0; a < e.inputs.size(); ++a)
            if (!detail::same(e.inputs[a], g.inputs[a])) return fail(i, "input " + std::to_string(a) + " mismatch");
        auto v = apply_rule(g.rule, g.inputs);
        if (!v || !detail::same(*v, g.output)) return fail(i, "output does not replay");
    }
    if (!detail::same(b.smooth, c.bound_smooth)) return fail(-1, "bound_smooth does not match the derivation");
    if (b.nonsmooth.has_value() != c.bound_nonsmooth.has_value()) return fail(-1, "no_bound status mismatch");
    if (b.nonsmooth) {
        if (!detail::same(*b.nonsmooth, *c.bound_nonsmooth)) return fail(-1, "bound_nonsmooth does not match");
        if (!(c.bound_smooth <= *c.bound_nonsmooth)) return fail(-1, "bound_smooth exceeds bound_nonsmooth");
    } else if (c.no_bound_reason != h.no_bound) {
        return fail(-1, "no_bound reason mismatch");
    }
    r.accepted = true;
    return r;
}

}  // namespace beacons
