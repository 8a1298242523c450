// beacons: command-line driver for solving, training, certifying and checking.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "beacons/experiment.hpp"

using namespace beacons;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string problem;
    std::vector<std::string> archs;
    uint64_t seed = 0;
    std::string scale = "paper";
    std::string out;
    std::string format = "csv";
};

void log_line(const std::string& s) { std::cerr << "beacons: " << s << "\n"; }

ProblemSpec problem_for(const Common& c) { return scaled(find_problem(c.problem), Scale::parse(c.scale)); }

std::vector<ArchitectureSpec> archs_for(const Common& c, const ProblemSpec& spec) {
    if (c.archs.empty()) return spec.archs;
    std::vector<ArchitectureSpec> v;
    for (auto& a : c.archs) v.push_back(ArchitectureSpec::parse(a));
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << s;
}

FrameSeries frames_for(const Common& c, const ProblemSpec& spec) {
    const fs::path dir = fs::path(c.out) / "frames";
    if (fs::exists(dir / "manifest.json")) return read_frames(dir);
    log_line("solving " + spec.id);
    auto s = solve_problem(spec);
    write_frames(s, dir);
    return s;
}

void print_tables(const std::vector<MetricsRow>& rows, const std::string& format) {
    auto t = emit_tables(rows);
    if (format == "json")
        std::cout << json17(t.json);
    else
        std::cout << t.errors_csv << "\n" << t.conservation_csv;
}

int cmd_list(const Common& c) {
    nlohmann::json j = nlohmann::json::array();
    if (c.format == "csv") std::cout << "id,system,cells,frames,train_frames,conditional,architectures\n";
    for (auto& p : registry()) {
        std::string archs;
        for (auto& a : p.archs) archs += (archs.empty() ? "" : " ") + a.id();
        if (c.format == "csv")
            std::cout << p.id << "," << p.system << "," << p.grid.cells() << "," << p.solver.frame_count << ","
                      << p.train_frames << "," << (p.conditional ? "yes" : "no") << "," << archs << "\n";
        j.push_back({{"id", p.id},
                     {"system", p.system},
                     {"cells", p.grid.cells()},
                     {"frames", p.solver.frame_count},
                     {"train_frames", p.train_frames},
                     {"conditional", p.conditional},
                     {"architectures", archs}});
    }
    if (c.format == "json") std::cout << j.dump(1) << "\n";
    return 0;
}

int cmd_solve(const Common& c) {
    auto spec = problem_for(c);
    auto t0 = std::chrono::steady_clock::now();
    auto s = solve_problem(spec);
    write_frames(s, fs::path(c.out) / "frames");
    log_line("solved " + spec.id + " in " +
             std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    return 0;
}

int cmd_train(const Common& c) {
    auto spec = problem_for(c);
    auto ref = frames_for(c, spec);
    auto budget = TrainingBudget::for_scale(Scale::parse(c.scale), c.seed);
    for (auto& a : archs_for(c, spec)) {
        log_line("training " + a.id());
        auto net = train_network(ref, spec, a, budget);
        save_checkpoint(net, fs::path(c.out) / "checkpoints" / (file_id(a) + ".json"));
    }
    return 0;
}

int cmd_certify(const Common& c) {
    auto spec = problem_for(c);
    auto ref = frames_for(c, spec);
    auto report = smoothness_for(spec, &ref);
    int rc = 0;
    for (auto& a : archs_for(c, spec)) {
        const fs::path ck = fs::path(c.out) / "checkpoints" / (file_id(a) + ".json");
        if (!fs::exists(ck)) {
            log_line("missing checkpoint " + ck.string() + " (run train first)");
            rc = 1;
            continue;
        }
        auto cert = certify_network(spec, load_checkpoint(ck), report);
        auto chk = check_bound_certificate(cert);
        write_file(fs::path(c.out) / "certificates" / (file_id(a) + ".json"), certificate_text(cert));
        std::cout << a.id() << ": bound_smooth " << fmt17(cert.bound_smooth) << ", bound_nonsmooth "
                  << (cert.bound_nonsmooth ? fmt17(*cert.bound_nonsmooth) : "no_bound (" + cert.no_bound_reason + ")")
                  << (chk.accepted ? ", check accepted" : ", check REJECTED: " + chk.reason) << "\n";
        if (!chk.accepted) rc = 1;
    }
    return rc;
}

int cmd_prove(const Common& c) {
    auto spec = find_problem(c.problem);
    auto proofs = prove_solver_properties(make_system(spec.system), spec.solver.limiter);
    int rc = proofs.all_proved() ? 0 : 1;
    for (auto& p : proofs.certificates) {
        auto chk = sym::check_certificate(p);
        if (!c.out.empty()) {
            std::string name = p.name;
            for (char& ch : name)
                if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
            write_file(fs::path(c.out) / "proofs" / (name + ".json"), sym::to_json(p).dump(1) + "\n");
        }
        std::cout << p.name << ": " << (p.proved ? "proved" : "NOT proved") << " in " << p.step_count << " steps, "
                  << (chk.accepted ? "check accepted" : "check REJECTED: " + chk.reason) << "\n";
        if (!chk.accepted) rc = 1;
    }
    return rc;
}

int cmd_metrics(const Common& c) {
    auto spec = problem_for(c);
    auto ref = read_frames(fs::path(c.out) / "frames");
    std::vector<MetricsRow> rows;
    for (auto& a : archs_for(c, spec)) {
        const fs::path ck = fs::path(c.out) / "checkpoints" / (file_id(a) + ".json");
        if (!fs::exists(ck)) continue;
        rows.push_back(compute_metrics(ref, predict_series(load_checkpoint(ck), ref), spec.train_frames, a.id()));
    }
    if (rows.empty()) {
        log_line("no checkpoints under " + c.out);
        return 1;
    }
    print_tables(rows, c.format);
    return 0;
}

int cmd_run(const Common& c) {
    RunOptions o;
    o.seed = c.seed;
    o.scale = Scale::parse(c.scale);
    for (auto& a : c.archs) o.archs.push_back(ArchitectureSpec::parse(a));
    o.out = c.out;
    auto t0 = std::chrono::steady_clock::now();
    o.log = [t0](const std::string& s) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "[%7.1f s] ",
                      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        log_line(buf + s);
    };
    auto b = run_experiment(c.problem, o);
    std::vector<MetricsRow> rows;
    for (auto& r : b.results) rows.push_back(r.metrics);
    print_tables(rows, c.format);
    for (auto& r : b.results) {
        if (!r.certificate || r.certificate->informational) continue;
        auto bound = r.certificate->governing_bound();
        std::cerr << "beacons: " << r.arch.id() << " observed l_inf_all " << fmt17(r.observed) << " vs bound "
                  << (bound ? fmt17(*bound) : "none") << "\n";
    }
    for (auto& s : b.stages)
        if (!s.ok) log_line("stage failed: " + s.name + ": " + s.error);
    return b.ok() && b.certificates_pass() ? 0 : 1;
}

int cmd_check(const std::vector<std::string>& files) {
    int rc = 0;
    for (auto& f : files) {
        std::string verdict;
        try {
            auto j = nlohmann::json::parse(slurp(f));
            if (j.contains("kind") && j["kind"] == "proof") {
                auto r = sym::check_certificate(sym::proof_from_json(j));
                verdict = r.accepted ? "accepted" : "rejected at step " + std::to_string(r.failing_step) + ": " + r.reason;
                if (!r.accepted) rc = 1;
            } else {
                auto r = check_bound_certificate(bound_certificate_from_json(j));
                verdict = r.accepted ? "accepted" : "rejected at step " + std::to_string(r.failing_step) + ": " + r.reason;
                if (!r.accepted) rc = 1;
            }
        } catch (const std::exception& e) {
            verdict = std::string("rejected: ") + e.what();
            rc = 1;
        }
        std::cout << f << ": " << verdict << "\n";
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BEACONS: bounded-error neural solvers for hyperbolic conservation laws"};
    app.require_subcommand(1);
    Common c;
    std::vector<std::string> files;

    auto add_common = [&](CLI::App* s, bool needs_problem, bool needs_out) {
        auto* p = s->add_option("--problem", c.problem, "problem id (see list)");
        if (needs_problem) p->required();
        s->add_option("--arch", c.archs, "architecture kind:layers:width (repeatable)");
        s->add_option("--seed", c.seed, "seed");
        s->add_option("--scale", c.scale, "paper, desk or a resolution factor in (0, 1]");
        auto* o = s->add_option("--out", c.out, "output directory");
        if (needs_out) o->required();
        s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto* list = app.add_subcommand("list", "list registered problems");
    add_common(list, false, false);
    auto* solve = app.add_subcommand("solve", "run the reference solver and write frames");
    add_common(solve, true, true);
    auto* train = app.add_subcommand("train", "train networks on the leading frames");
    add_common(train, true, true);
    auto* certify = app.add_subcommand("certify", "emit bound certificates for trained networks");
    add_common(certify, true, true);
    auto* prove = app.add_subcommand("prove", "prove solver properties");
    add_common(prove, true, false);
    auto* metrics = app.add_subcommand("metrics", "recompute metrics from archived frames and checkpoints");
    add_common(metrics, true, true);
    auto* run = app.add_subcommand("run", "full pipeline");
    add_common(run, true, true);
    auto* check = app.add_subcommand("check", "replay certificates");
    check->add_option("files", files, "certificate files")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*list) return cmd_list(c);
        if (*solve) return cmd_solve(c);
        if (*train) return cmd_train(c);
        if (*certify) return cmd_certify(c);
        if (*prove) return cmd_prove(c);
        if (*metrics) return cmd_metrics(c);
        if (*run) return cmd_run(c);
        if (*check) return cmd_check(files);
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    }
    return 1;
}
