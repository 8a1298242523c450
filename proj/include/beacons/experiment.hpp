// End-to-end experiment: solve, train, infer, measure, certify, archive.
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "certificate.hpp"
#include "characteristics.hpp"
#include "checker.hpp"
#include "checkpoint.hpp"
#include "frames_io.hpp"
#include "json17.hpp"
#include "metrics.hpp"
#include "registry.hpp"
#include "solver_proofs.hpp"

namespace beacons {

struct TrainingBudget {
    TrainConfig plain, head, stage;
    int stride = 1;  // spatial sample stride per axis
    size_t target_samples = 0;  // > 0: widen the stride until the training set is about this size
    CandidateBudget candidates;
    int stage_samples = 257;

    static TrainingBudget for_scale(const Scale& s, uint64_t seed) {
        TrainingBudget b;
        b.plain.lr = 0.05;
        b.head.lr = 0.1;
        b.stage.lr = 0.1;
        b.stage.min_epochs = 5;
        b.stage.max_epochs = 20;
        if (s.name != "paper") {
            b.target_samples = 4096;
            b.plain.min_epochs = b.head.min_epochs = 5;
            b.plain.max_epochs = b.head.max_epochs = 25;
        }
        for (auto* c : {&b.plain, &b.head, &b.stage}) c->seed = seed;
        b.candidates.seed = seed;
        return b;
    }
    nlohmann::json to_json() const {
        auto tc = [](const TrainConfig& c) {
            return nlohmann::json{{"lr", c.lr},
                                  {"min_epochs", c.min_epochs},
                                  {"max_epochs", c.max_epochs},
                                  {"steps_per_epoch", c.steps_per_epoch},
                                  {"tol", c.tol}};
        };
        return {{"plain", tc(plain)},
                {"head", tc(head)},
                {"stage", tc(stage)},
                {"stride", stride},
                {"target_samples", target_samples},
                {"stage_samples", stage_samples},
                {"candidates",
                 {{"probe_width", candidates.probe_width},
                  {"probe_steps", candidates.probe_steps},
                  {"probe_lr", candidates.probe_lr},
                  {"max_points", candidates.max_points},
                  {"C_grid", candidates.C_grid}}}};
    }
};

struct RunOptions {
    uint64_t seed = 0;
    Scale scale;
    std::vector<ArchitectureSpec> archs;  // empty: the problem's list
    std::optional<TrainingBudget> budget;
    std::filesystem::path out;  // empty: nothing written
    std::function<void(const std::string&)> log;
};

struct ArchResult {
    ArchitectureSpec arch;
    DeepNet net;
    FrameSeries predicted;
    MetricsRow metrics;
    std::vector<CandidateReport> searches;  // beacons: one per component
    std::optional<BoundCertificate> certificate;
    BoundCheck check;
    double observed = 0.0;  // all-frame L-inf on the certificate's scale
    std::optional<bool> bound_holds;
};

struct StageRecord {
    std::string name;
    bool ok = true;
    std::string error;
};

struct RunBundle {
    ProblemSpec spec;
    RunOptions options;
    TrainingBudget budget;
    FrameSeries reference;
    SmoothnessReport report;
    SolverProofs proofs;
    std::vector<sym::CheckResult> proof_checks;
    std::vector<ArchResult> results;
    std::vector<StageRecord> stages;

    bool ok() const {
        for (auto& s : stages)
            if (!s.ok) return false;
        return true;
    }
    bool certificates_pass() const {
        for (auto& c : proof_checks)
            if (!c.accepted) return false;
        for (auto& r : results)
            if (r.certificate && !r.check.accepted) return false;
        return true;
    }
};

inline std::string file_id(const ArchitectureSpec& a) {
    std::string s = a.id();
    for (char& ch : s)
        if (ch == ':') ch = '_';
    return s;
}

// Network predictions on every reference cell and frame time.
inline FrameSeries predict_series(const DeepNet& net, const FrameSeries& ref) {
    FrameSeries p = ref;
    const GridSpec& g = ref.grid();
    for (size_t k = 0; k < p.frames.size(); ++k) {
        auto& f = p.frames[k];
        for (int j = 0; j < f.ny(); ++j)
            for (int i = 0; i < f.nx(); ++i) {
                double pt[3] = {ref.times[k], g.center(0, i), g.dim == 2 ? g.center(1, j) : 0.0};
                auto u = net.eval(pt);
                State s{};
                for (int c = 0; c < net.m; ++c) s[c] = u[c];
                f.at(i, j) = s;
            }
    }
    return p;
}

inline SmoothnessReport smoothness_for(const ProblemSpec& spec, const FrameSeries* frames) {
    auto sys = make_system(spec.system);
    auto r = classify_system(sys, spec.initial);
    detect_asymptotic_smoothing(r, sys, spec.initial, frames);
    return r;
}

inline FrameSeries solve_problem(const ProblemSpec& spec) {
    return run_simulation(make_system(spec.system), spec.grid, spec.initial_fn(), spec.solver);
}

// Candidate search for every component, then BEACONS training.
inline DeepNet train_beacons_searched(const Dataset& data, const Normalizer& inputs, const ArchitectureSpec& arch,
                                      const TrainingBudget& b, std::vector<CandidateReport>* searches) {
    const Dataset dn = normalized_inputs(data, inputs);
    auto [lo, hi] = target_range(data);
    std::vector<std::vector<AnalyticMap>> maps;
    for (int c = 0; c < data.d_out; ++c) {
        std::vector<double> z(dn.size());
        for (size_t s = 0; s < dn.size(); ++s) z[s] = 2.0 * (dn.Y[s * dn.d_out + c] - lo[c]) / (hi[c] - lo[c]) - 1.0;
        auto rep = candidate_search(dn.X, z, dn.d_in, arch.layers - 1, b.candidates);
        maps.push_back(rep.chosen);
        if (searches) searches->push_back(std::move(rep));
    }
    BeaconsTraining bt;
    bt.head = b.head;
    bt.stage = b.stage;
    bt.stage_samples = b.stage_samples;
    return train_beacons(data, inputs, arch, maps, bt);
}

inline int sample_stride(const ProblemSpec& spec, const TrainingBudget& b) {
    if (b.target_samples == 0) return b.stride;
    const double total = static_cast<double>(spec.grid.cells()) * spec.train_frames;
    const double s = std::pow(total / static_cast<double>(b.target_samples), 1.0 / spec.grid.dim);
    return std::max(b.stride, static_cast<int>(std::lround(s)));
}

inline DeepNet train_network(const FrameSeries& ref, const ProblemSpec& spec, const ArchitectureSpec& arch,
                             const TrainingBudget& b, std::vector<CandidateReport>* searches = nullptr) {
    const Dataset data = frames_dataset(ref, 0, spec.train_frames, sample_stride(spec, b));
    const Normalizer inputs = frames_normalizer(ref);
    if (arch.kind == ArchKind::plain) return train_plain(data, inputs, arch, b.plain);
    return train_beacons_searched(data, inputs, arch, b, searches);
}

inline BoundCertificate certify_network(const ProblemSpec& spec, const DeepNet& net, const SmoothnessReport& report,
                                        const std::vector<CandidateReport>& searches = {}) {
    CertifyRequest q;
    q.problem = spec.id;
    q.arch = net.arch;
    q.report = report;
    q.d_in = net.d_in();
    q.conditional = spec.conditional;
    q.component = 0;
    q.target_lo = net.lo[0];
    q.target_hi = net.hi[0];
    if (net.arch.kind == ArchKind::beacons) {
        for (auto& st : net.chains[0].stages) q.maps.push_back(st.map);
        q.target_lo = net.chains[0].lo;
        q.target_hi = net.chains[0].hi;
    }
    if (!searches.empty()) {
        q.search = to_json(searches[0]);
        q.warnings = searches[0].warnings;
    }
    return certify(q);
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << s;
}

inline std::string sanitize(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return s;
}

}  // namespace detail

struct Tables {
    std::string errors_csv, conservation_csv;
    nlohmann::json json;
};

inline Tables emit_tables(const std::vector<MetricsRow>& rows) {
    Tables t;
    t.errors_csv = "architecture,l_inf_final,l2_final,l_inf_all,l2_all\n";
    t.json = nlohmann::json::array();
    bool multi = !rows.empty() && rows[0].components.size() > 1;
    t.conservation_csv = "architecture,conservation_final,conservation_total";
    if (multi)
        for (auto& c : rows[0].components) t.conservation_csv += ",conservation_final_" + c + ",conservation_total_" + c;
    t.conservation_csv += "\n";
    for (auto& r : rows) {
        using detail::csv_num;
        t.errors_csv += r.arch + "," + csv_num(r.l_inf_final) + "," + csv_num(r.l2_final) + "," +
                        csv_num(r.l_inf_all) + "," + csv_num(r.l2_all) + "\n";
        t.conservation_csv +=
            r.arch + "," + csv_num(r.headline_conservation_final()) + "," + csv_num(r.headline_conservation_total());
        if (multi)
            for (size_t q = 0; q < r.components.size(); ++q)
                t.conservation_csv += "," + csv_num(r.conservation_final[q]) + "," + csv_num(r.conservation_total[q]);
        t.conservation_csv += "\n";
        nlohmann::json j{{"architecture", r.arch},
                         {"l_inf_final", r.l_inf_final},
                         {"l2_final", r.l2_final},
                         {"l_inf_all", r.l_inf_all},
                         {"l2_all", r.l2_all},
                         {"headline", r.components[r.headline]},
                         {"conservation_final", r.headline_conservation_final()},
                         {"conservation_total", r.headline_conservation_total()}};
        if (multi) {
            for (size_t q = 0; q < r.components.size(); ++q) {
                j["components"][r.components[q]] = {{"conservation_final", r.conservation_final[q]},
                                                    {"conservation_total", r.conservation_total[q]}};
            }
        }
        t.json.push_back(std::move(j));
    }
    return t;
}

inline nlohmann::json report_json(const SmoothnessReport& r) {
    nlohmann::json t = nlohmann::json::array();
    for (double v : r.t_inf) t.push_back(std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v));
    return {{"classification", to_string(r.classification)},
            {"n", r.n},
            {"n_global", r.n_global},
            {"t_inf", t},
            {"discontinuity_count", r.discontinuity_count},
            {"linear_flux", r.linear_flux},
            {"notes", r.notes}};
}

inline nlohmann::json manifest_json(const RunBundle& b) {
    nlohmann::json m;
    m["format"] = "beacons-run";
    m["version"] = 1;
    m["problem"] = b.spec.id;
    m["seed"] = b.options.seed;
    m["scale"] = b.options.scale.name;
    m["grid"] = grid_to_json(b.spec.grid);
    m["solver"] = {{"flux", to_string(b.spec.solver.flux)},
                   {"limiter", to_string(b.spec.solver.limiter)},
                   {"cfl", b.spec.solver.cfl},
                   {"t_end", b.spec.solver.t_end},
                   {"frame_count", b.spec.solver.frame_count}};
    m["train_frames"] = b.spec.train_frames;
    m["conditional"] = b.spec.conditional;
    m["budget"] = b.budget.to_json();
    m["smoothness"] = report_json(b.report);
    m["stages"] = nlohmann::json::array();
    for (auto& s : b.stages) {
        nlohmann::json e{{"name", s.name}, {"ok", s.ok}};
        if (!s.ok) e["error"] = s.error;
        m["stages"].push_back(e);
    }
    m["proofs"] = nlohmann::json::array();
    for (size_t k = 0; k < b.proofs.certificates.size(); ++k)
        m["proofs"].push_back({{"name", b.proofs.certificates[k].name},
                               {"proved", b.proofs.certificates[k].proved},
                               {"checked", k < b.proof_checks.size() && b.proof_checks[k].accepted}});
    m["architectures"] = nlohmann::json::array();
    for (auto& r : b.results) {
        nlohmann::json a{{"id", r.arch.id()}, {"checkpoint", "checkpoints/" + file_id(r.arch) + ".json"}};
        if (r.certificate) {
            a["certificate"] = "certificates/" + file_id(r.arch) + ".json";
            a["certificate_accepted"] = r.check.accepted;
            a["bound_smooth"] = r.certificate->bound_smooth;
            if (r.certificate->bound_nonsmooth)
                a["bound_nonsmooth"] = *r.certificate->bound_nonsmooth;
            else
                a["bound_nonsmooth"] = {{"no_bound", r.certificate->no_bound_reason}};
            a["observed_l_inf_all"] = r.observed;
            if (r.bound_holds) a["bound_holds"] = *r.bound_holds;
        }
        m["architectures"].push_back(a);
    }
    m["reference"] = {{"bounds", nlohmann::json::array()}, {"rows", nlohmann::json::array()}};
    for (auto& rb : b.spec.reference_bounds) {
        nlohmann::json e{{"arch", rb.arch}, {"smooth", rb.smooth}, {"proof_steps", rb.proof_steps}};
        if (rb.nonsmooth) e["nonsmooth"] = *rb.nonsmooth;
        else e["nonsmooth"] = nullptr;
        m["reference"]["bounds"].push_back(e);
    }
    for (auto& rr : b.spec.reference_rows) {
        nlohmann::json e{{"arch", rr.arch},
                         {"l_inf_final", rr.l_inf_final},
                         {"l2_final", rr.l2_final},
                         {"l_inf_all", rr.l_inf_all},
                         {"l2_all", rr.l2_all}};
        if (rr.conservation_final) e["conservation_final"] = *rr.conservation_final;
        if (rr.conservation_total) e["conservation_total"] = *rr.conservation_total;
        m["reference"]["rows"].push_back(e);
    }
    m["ok"] = b.ok() && b.certificates_pass();
    return m;
}

// Writes the bundle under dir: frames/, checkpoints/, certificates/, proofs/, tables, manifest.
inline void write_bundle(const RunBundle& b, const std::filesystem::path& dir) {
    using detail::write_text;
    write_frames(b.reference, dir / "frames");
    std::vector<MetricsRow> rows;
    for (auto& r : b.results) {
        write_text(dir / "checkpoints" / (file_id(r.arch) + ".json"), json17(checkpoint_json(r.net)));
        if (r.certificate)
            write_text(dir / "certificates" / (file_id(r.arch) + ".json"), certificate_text(*r.certificate));
        rows.push_back(r.metrics);
    }
    for (auto& c : b.proofs.certificates)
        write_text(dir / "proofs" / (detail::sanitize(c.name) + ".json"), sym::to_json(c).dump(1) + "\n");
    auto t = emit_tables(rows);
    write_text(dir / "metrics.csv", t.errors_csv);
    write_text(dir / "conservation.csv", t.conservation_csv);
    write_text(dir / "tables.json", json17(t.json));
    write_text(dir / "smoothness.json", json17(report_json(b.report)));
    write_text(dir / "manifest.json", json17(manifest_json(b)));
}

inline RunBundle run_experiment(const std::string& id, const RunOptions& opt) {
    RunBundle b;
    b.spec = scaled(find_problem(id), opt.scale);
    b.spec.validate();
    b.options = opt;
    if (!opt.archs.empty()) b.spec.archs = opt.archs;
    b.budget = opt.budget ? *opt.budget : TrainingBudget::for_scale(opt.scale, opt.seed);
    auto log = [&](const std::string& s) {
        if (opt.log) opt.log(s);
    };
    auto stage = [&](const std::string& name, const std::function<void()>& fn) {
        log(name);
        StageRecord r{name, true, ""};
        try {
            fn();
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
            log("  failed: " + r.error);
        }
        b.stages.push_back(r);
        return r.ok;
    };

    if (!stage("solve", [&] { b.reference = solve_problem(b.spec); })) {
        if (!opt.out.empty()) detail::write_text(opt.out / "manifest.json", json17(manifest_json(b)));
        return b;
    }
    stage("smoothness", [&] { b.report = smoothness_for(b.spec, &b.reference); });
    stage("prove", [&] {
        b.proofs = prove_solver_properties(make_system(b.spec.system), b.spec.solver.limiter);
        for (auto& c : b.proofs.certificates) b.proof_checks.push_back(sym::check_certificate(c));
        if (!b.proofs.all_proved()) throw std::runtime_error("a solver property was not proved");
    });
    for (auto& arch : b.spec.archs) {
        ArchResult r;
        r.arch = arch;
        const std::string tag = arch.id();
        if (!stage("train " + tag, [&] { r.net = train_network(b.reference, b.spec, arch, b.budget, &r.searches); }))
            continue;
        stage("metrics " + tag, [&] {
            r.predicted = predict_series(r.net, b.reference);
            r.metrics = compute_metrics(b.reference, r.predicted, b.spec.train_frames, tag);
            if (!r.metrics.finite()) throw std::runtime_error("non-finite metrics");
        });
        stage("certify " + tag, [&] {
            r.certificate = certify_network(b.spec, r.net, b.report, r.searches);
            r.check = check_bound_certificate(*r.certificate);
            if (!r.check.accepted) throw std::runtime_error("certificate rejected: " + r.check.reason);
            r.observed = r.metrics.l_inf_all_abs / (r.certificate->target_hi - r.certificate->target_lo);
            if (!r.certificate->informational)
                if (auto bound = r.certificate->governing_bound()) r.bound_holds = r.observed <= *bound;
        });
        r.predicted.frames.clear();  // large; metrics are kept
        b.results.push_back(std::move(r));
    }
    if (!opt.out.empty()) stage("write", [&] { write_bundle(b, opt.out); });
    return b;
}

}  // namespace beacons
