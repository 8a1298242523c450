#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "beacons/experiment.hpp"

using namespace beacons;
namespace fs = std::filesystem;

namespace {

FrameSeries tiny_series(int m, int frames) {
    FrameSeries s;
    s.system = "t";
    for (int c = 0; c < m; ++c) s.components.push_back("q" + std::to_string(c));
    GridSpec g = GridSpec::line(0, 2, 8);
    for (int k = 0; k < frames; ++k) {
        StateField f(g, m);
        for (int i = 0; i < 8; ++i)
            for (int c = 0; c < m; ++c) f.at(i, 0)[c] = 1.0 + 0.1 * i + c + 0.01 * k;
        s.frames.push_back(f);
        s.times.push_back(0.1 * k);
    }
    return s;
}

TrainingBudget tiny_budget(uint64_t seed) {
    auto b = TrainingBudget::for_scale(Scale::parse("desk"), seed);
    for (auto* c : {&b.plain, &b.head, &b.stage}) {
        c->min_epochs = 1;
        c->max_epochs = 2;
        c->steps_per_epoch = 10;
    }
    b.candidates.probe_steps = 5;
    b.candidates.C_grid = {0.5, 2.0};
    b.target_samples = 512;
    return b;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Registry, PaperProblems) {
    auto r = registry();
    std::vector<std::string> ids;
    for (auto& p : r) {
        EXPECT_NO_THROW(p.validate()) << p.id;
        ids.push_back(p.id);
        EXPECT_GT(p.train_fraction(), 0.0);
        EXPECT_LT(p.train_fraction(), 1.0);
    }
    for (auto id : {"advection1d", "advection2d", "burgers1d", "burgers2d", "euler1d", "euler2d"})
        EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;

    auto sod = find_problem("euler1d");
    EXPECT_EQ(sod.grid.n[0], 2048);
    EXPECT_EQ(sod.solver.cfl, 0.95);
    EXPECT_EQ(sod.solver.t_end, 0.2);
    EXPECT_EQ(sod.solver.frame_count, 200);
    EXPECT_TRUE(sod.conditional);
    EXPECT_EQ(sod.initial.eval(0.25, 0)[2], 2.5);
    EXPECT_EQ(sod.initial.eval(0.75, 0)[0], 0.125);

    auto adv = find_problem("advection1d");
    EXPECT_EQ(adv.grid.n[0], 1024);
    EXPECT_EQ(adv.solver.cfl, 1.0);
    EXPECT_EQ(adv.solver.t_end, 1.0);
    EXPECT_EQ(adv.solver.frame_count, 100);
    EXPECT_EQ(adv.train_frames, 33);
    EXPECT_FALSE(adv.conditional);
    EXPECT_EQ(adv.initial.eval(-0.5, 0)[0], 1.0);
    EXPECT_EQ(adv.initial.eval(0.5, 0)[0], 0.0);
    EXPECT_EQ(adv.archs.size(), 4u);

    auto quad = find_problem("euler2d");
    EXPECT_EQ(quad.initial.pieces.size(), 4u);
    EXPECT_EQ(quad.initial.cx, 0.8);
    EXPECT_EQ(quad.initial.cy, 0.8);
    EXPECT_EQ(quad.initial.eval(0.9, 0.9)[3], 3.75);
    EXPECT_TRUE(quad.conditional);

    auto burg = find_problem("burgers1d");
    EXPECT_EQ(burg.initial.eval(3.0, 0)[0], 3.0);
    EXPECT_EQ(burg.initial.eval(5.0, 0)[0], -1.0);
    auto disk = find_problem("advection2d");
    EXPECT_EQ(disk.initial.eval(-0.5, -0.5)[0], 1.0);
    EXPECT_EQ(disk.initial.eval(0.5, 0.5)[0], 0.0);

    EXPECT_THROW(find_problem("nope"), std::invalid_argument);
}

TEST(Registry, ReferenceMetadata) {
    auto adv = find_problem("advection1d");
    bool seen = false;
    for (auto& row : adv.reference_rows)
        if (row.arch == "beacons:8:128") {
            EXPECT_EQ(row.l_inf_all, 0.633319);
            seen = true;
        }
    EXPECT_TRUE(seen);
    ASSERT_EQ(adv.reference_bounds.size(), 2u);
    EXPECT_EQ(adv.reference_bounds[1].smooth, 0.707106);
    auto b2 = find_problem("burgers2d");
    for (auto& rb : b2.reference_bounds) EXPECT_FALSE(rb.nonsmooth);
}

TEST(Registry, Scaling) {
    auto desk = scaled(find_problem("euler1d"), Scale::parse("desk"));
    EXPECT_EQ(desk.grid.n[0], 1024);
    auto d2 = scaled(find_problem("burgers2d"), Scale::parse("desk"));
    EXPECT_EQ(d2.grid.n[0], 64);
    EXPECT_EQ(d2.archs.size(), 4u);
    EXPECT_EQ(d2.archs[0].id(), "plain:4:32");
    auto half = scaled(find_problem("advection1d"), Scale::parse("0.5"));
    EXPECT_EQ(half.grid.n[0], 512);
    EXPECT_THROW(Scale::parse("2"), std::invalid_argument);
    EXPECT_THROW(Scale::parse("huge"), std::invalid_argument);
}

TEST(Metrics, IdenticalIsZero) {
    auto s = tiny_series(1, 5);
    auto m = compute_metrics(s, s, 2, "x");
    for (double v : {m.l_inf_final, m.l2_final, m.l_inf_all, m.l2_all, m.headline_conservation_final(),
                     m.headline_conservation_total()})
        EXPECT_EQ(v, 0.0);
}

TEST(Metrics, UniformShiftOnFinalFrame) {
    auto ref = tiny_series(1, 5);
    auto pred = ref;
    const double c = 0.25;
    for (int i = 0; i < 8; ++i) pred.frames.back().at(i, 0)[0] += c;
    auto m = compute_metrics(ref, pred, 2);
    double ref_max = 0.0;
    for (size_t k = 2; k < 5; ++k)
        for (int i = 0; i < 8; ++i) ref_max = std::max(ref_max, std::abs(ref.frames[k].at(i, 0)[0]));
    EXPECT_DOUBLE_EQ(m.l_inf_final, c / ref_max);
    EXPECT_DOUBLE_EQ(m.l_inf_all, c / ref_max);
    const double volume = 2.0, dV = 0.25;
    EXPECT_DOUBLE_EQ(m.headline_conservation_final(), c * volume / dV);
    EXPECT_DOUBLE_EQ(m.headline_conservation_total(), c * volume / dV);
    EXPECT_GT(m.l2_final, m.l2_all);

    for (int i = 0; i < 8; ++i) pred.frames.back().at(i, 0)[0] -= 2 * c;
    auto below = compute_metrics(ref, pred, 2);
    EXPECT_LT(below.headline_conservation_final(), 0.0);
    EXPECT_LT(below.headline_conservation_total(), 0.0);
}

TEST(Metrics, Errors) {
    auto a = tiny_series(1, 4), b = tiny_series(1, 3);
    EXPECT_THROW(compute_metrics(a, b, 1), std::invalid_argument);
    auto c = a;
    c.frames[1] = StateField(GridSpec::line(0, 2, 9), 1);
    EXPECT_THROW(compute_metrics(a, c, 1), std::invalid_argument);
    EXPECT_THROW(compute_metrics(a, a, 4), std::invalid_argument);
}

TEST(Tables, Layout) {
    auto s = tiny_series(1, 4);
    std::vector<MetricsRow> rows;
    for (auto id : {"plain:6:64", "plain:8:128", "beacons:6:64", "beacons:8:128"}) rows.push_back(compute_metrics(s, s, 1, id));
    auto t = emit_tables(rows);
    std::istringstream is(t.errors_csv);
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "architecture,l_inf_final,l2_final,l_inf_all,l2_all");
    int n = 0;
    while (std::getline(is, line)) ++n;
    EXPECT_EQ(n, 4);
    EXPECT_EQ(t.json.size(), 4u);
    EXPECT_EQ(t.conservation_csv.substr(0, t.conservation_csv.find('\n')),
              "architecture,conservation_final,conservation_total");

    auto e = tiny_series(3, 4);
    e.components = {"rho", "rho_u", "E"};
    auto te = emit_tables({compute_metrics(e, e, 1, "beacons:4:32")});
    EXPECT_NE(te.conservation_csv.find("conservation_final_rho_u"), std::string::npos);
    EXPECT_NE(te.conservation_csv.find("conservation_total_E"), std::string::npos);
}

TEST(Experiment, BundleIsCompleteAndDeterministic) {
    const fs::path base = fs::temp_directory_path() / "beacons_harness_test";
    fs::remove_all(base);
    RunOptions o;
    o.scale = Scale::parse("0.125");
    o.seed = 3;
    o.archs = {ArchitectureSpec::parse("plain:2:4"), ArchitectureSpec::parse("beacons:3:4")};
    o.budget = tiny_budget(o.seed);
    o.out = base / "a";
    auto b = run_experiment("advection1d", o);
    ASSERT_TRUE(b.ok());
    EXPECT_TRUE(b.certificates_pass());
    ASSERT_EQ(b.results.size(), 2u);
    for (auto f : {"manifest.json", "metrics.csv", "conservation.csv", "tables.json", "smoothness.json",
                   "frames/manifest.json", "checkpoints/plain_2_4.json", "checkpoints/beacons_3_4.json",
                   "certificates/plain_2_4.json", "certificates/beacons_3_4.json"})
        EXPECT_TRUE(fs::exists(o.out / f)) << f;
    EXPECT_FALSE(fs::is_empty(o.out / "proofs"));

    auto cert = bound_certificate_from_json(nlohmann::json::parse(slurp(o.out / "certificates/beacons_3_4.json")));
    EXPECT_TRUE(check_bound_certificate(cert).accepted);
    ASSERT_TRUE(b.results[1].bound_holds.has_value());

    // replay: checkpoint + frames reproduce the metrics
    auto ref = read_frames(o.out / "frames");
    auto net = load_checkpoint(o.out / "checkpoints/beacons_3_4.json");
    auto m = compute_metrics(ref, predict_series(net, ref), b.spec.train_frames, "beacons:3:4");
    EXPECT_EQ(m.l2_all, b.results[1].metrics.l2_all);
    EXPECT_EQ(m.l_inf_all, b.results[1].metrics.l_inf_all);

    o.out = base / "b";
    run_experiment("advection1d", o);
    for (auto& e : fs::recursive_directory_iterator(base / "a")) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), base / "a");
        EXPECT_EQ(slurp(e.path()), slurp(base / "b" / rel)) << rel;
    }
    fs::remove_all(base);
}

TEST(Experiment, UnknownProblemThrows) {
    EXPECT_THROW(run_experiment("nope", RunOptions{}), std::invalid_argument);
}
