#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "beacons/certificate.hpp"
#include "support/compose_oracle.hpp"

using namespace beacons;

namespace {

SmoothnessReport report_for(const std::string& sys_name, const InitialData& u0, const FrameSeries* frames = nullptr) {
    auto sys = make_system(sys_name);
    auto r = classify_system(sys, u0);
    detect_asymptotic_smoothing(r, sys, u0, frames);
    return r;
}

SmoothnessReport advection_step() {
    return report_for("advection1d", InitialData::riemann(-1, 1, 0, {1.0}, {0.0}, 1));
}

std::vector<AnalyticMap> identities(int k) { return std::vector<AnalyticMap>(k, AnalyticMap{MapForm::identity, 1.0}); }

CertifyRequest request(const std::string& problem, const std::string& arch, const SmoothnessReport& r, int d_in) {
    CertifyRequest q;
    q.problem = problem;
    q.arch = ArchitectureSpec::parse(arch);
    q.report = r;
    q.d_in = d_in;
    if (q.arch.kind == ArchKind::beacons) q.maps = identities(q.arch.layers - 1);
    return q;
}

double next_up(double v) { return std::nextafter(v, 2 * v + 1); }

}  // namespace

TEST(Rate, Examples) {
    EXPECT_EQ(shallow_rate(64, 1, 2), 0.125);
    EXPECT_EQ(shallow_rate(128, 2, 2), 0.0078125);
    for (long N : {1L, 7L, 64L, 100000L})
        for (int d : {1, 2, 3}) EXPECT_EQ(shallow_rate(N, 0, d), 1.0);
    EXPECT_THROW(shallow_rate(0, 1, 1), std::invalid_argument);
    EXPECT_THROW(shallow_rate(4, -1, 1), std::invalid_argument);
    EXPECT_THROW(shallow_rate(4, 1, 0), std::invalid_argument);
}

TEST(Rate, Monotone) {
    for (long N = 1; N < 300; N += 7)
        for (int n = 0; n <= 8; ++n)
            for (int d = 1; d <= 3; ++d) {
                EXPECT_LE(shallow_rate(N + 1, n, d), shallow_rate(N, n, d));
                EXPECT_LE(shallow_rate(N, n + 1, d), shallow_rate(N, n, d));
                if (d < 3) {
                    EXPECT_GE(shallow_rate(N, n, d + 1), shallow_rate(N, n, d));
                }
            }
}

TEST(Compose, Examples) {
    for (double L : {0.0, 0.5, 3.0}) EXPECT_EQ(compose_bound(0, L, 0), 0.0);
    EXPECT_EQ(compose_bound(0.1, 0.5, 1.0), 0.6);
    EXPECT_THROW(compose_bound(-1e-300, 1, 1), std::invalid_argument);
    EXPECT_THROW(compose_bound(0, INFINITY, 1), std::invalid_argument);
    EXPECT_THROW(compose_bound(0, 1, NAN), std::invalid_argument);
}

TEST(Compose, NeverBelowGridMeasuredError) {
    for (uint64_t s = 0; s < 500; ++s) {
        auto c = testgen::compose_case(s);
        ASSERT_LE(c.lhs, compose_bound(c.e_f, c.L, c.e_g) * (1 + 1e-12)) << "case " << s;
    }
}

TEST(Chain, SingleStage) {
    CompositionChain c;
    c.stages.push_back(ChainStage::learned_stage(64, 1, 2, true, 0));
    auto b = chain_bound(c);
    EXPECT_EQ(b.smooth, 0.125);
    ASSERT_TRUE(b.nonsmooth);
    EXPECT_EQ(*b.nonsmooth, 1.0);
    ASSERT_EQ(b.steps.size(), 3u);
    EXPECT_EQ(b.steps.back().rule, "max_split");
}

TEST(Chain, HeadThenArcsinhStage) {
    CompositionChain c;
    c.stages.push_back(ChainStage::learned_stage(64, 0, 2, true, 0));
    c.stages.push_back(ChainStage::analytic_stage({MapForm::arcsinh, 2.0}));
    c.stages.push_back(ChainStage::learned_stage(400, 1, 2));
    EXPECT_EQ(c.stages[1].lipschitz(), 0.5);
    auto b = chain_bound(c);
    EXPECT_EQ(shallow_rate(400, 1, 2), 0.05);
    ASSERT_TRUE(b.nonsmooth);
    EXPECT_EQ(*b.nonsmooth, 0.05 + 0.5 * 1.0);
    EXPECT_DOUBLE_EQ(*b.nonsmooth, 0.55);
}

TEST(Chain, RangeContainment) {
    CompositionChain c;
    c.stages.push_back(ChainStage::learned_stage(8, 1, 1, true));
    c.stages.push_back(ChainStage::rescale_stage(3.0, 0.0));
    c.stages.push_back(ChainStage::analytic_stage({MapForm::identity, 1.0}));
    c.stages.push_back(ChainStage::learned_stage(8, 8, 1));
    EXPECT_THROW(chain_bound(c), std::invalid_argument);
    c.stages[1].scale = 1.0;
    EXPECT_NO_THROW(chain_bound(c));

    CompositionChain two_heads;
    two_heads.stages.push_back(ChainStage::learned_stage(8, 1, 1, true));
    two_heads.stages.push_back(ChainStage::analytic_stage({MapForm::identity, 1.0}));
    two_heads.stages.push_back(ChainStage::learned_stage(8, 1, 1, true));
    EXPECT_THROW(chain_bound(two_heads), std::invalid_argument);

    CompositionChain headless;
    headless.stages.push_back(ChainStage::learned_stage(8, 1, 1));
    EXPECT_THROW(chain_bound(headless), std::invalid_argument);
}

TEST(Chain, MonotoneInRatesAndLipschitz) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        auto build = [&](long N2, double C) {
            CompositionChain c;
            c.stages.push_back(ChainStage::learned_stage(32, 1, 2, true, 0));
            c.stages.push_back(ChainStage::rescale_stage(2.0, -1.0));
            AnalyticMap m{MapForm::arcsinh, C};
            c.stages.push_back(ChainStage::rescale_stage(m.domain(), 0.0));
            c.stages.push_back(ChainStage::analytic_stage(m));
            c.stages.push_back(ChainStage::learned_stage(N2, 2, 1));
            return chain_bound(c);
        };
        long N = 1 + rng() % 500;
        double C = 0.1 + 3.0 * (rng() % 1000) / 1000.0;
        auto a = build(N, C), b = build(N + 1, C);  // smaller stage rate
        EXPECT_LE(*b.nonsmooth, *a.nonsmooth);
        EXPECT_LE(b.smooth, a.smooth);
        auto c = build(N, C * 1.1);  // larger sinh(C)/C
        EXPECT_GE(*c.nonsmooth, *a.nonsmooth);
    }
}

TEST(Certify, AdvectionBoundsCoincide) {
    auto r = advection_step();
    auto c = certify(request("advection1d", "beacons:6:64", r, 2));
    ASSERT_TRUE(c.bound_nonsmooth);
    EXPECT_TRUE(std::isfinite(c.bound_smooth));
    EXPECT_EQ(c.bound_smooth, *c.bound_nonsmooth);
    EXPECT_FALSE(c.conditional);
    EXPECT_FALSE(c.informational);
    EXPECT_EQ(c.step_count, static_cast<int>(c.derivation.size()));

    auto big = certify(request("advection1d", "beacons:8:128", r, 2));
    EXPECT_GE(*big.bound_nonsmooth, 0.633319);
    EXPECT_TRUE(check_bound_certificate(big).accepted);
}

TEST(Certify, BurgersDiskHasNoNonsmoothBound) {
    auto u0 = InitialData::disk(-1, 1, -0.5, -0.5, 0.33, {1.0}, {0.0}, 1);
    auto r = report_for("burgers2d", u0);
    ASSERT_EQ(r.classification, Classification::asymptotically_smooth);
    for (auto a : {"beacons:6:64", "beacons:8:128", "plain:8:128"}) {
        auto c = certify(request("burgers2d", a, r, 3));
        EXPECT_FALSE(c.bound_nonsmooth);
        EXPECT_EQ(c.no_bound_reason, "discontinuity set is asymptotically empty");
        EXPECT_TRUE(check_bound_certificate(c).accepted);
    }
}

TEST(Certify, BurgersStepHasBothBounds) {
    auto r = report_for("burgers1d", InitialData::top_hat(0, 6, 2, 4, 3, -1));
    auto c = certify(request("burgers1d", "beacons:6:64", r, 2));
    ASSERT_TRUE(c.bound_nonsmooth);
    EXPECT_LT(c.bound_smooth, *c.bound_nonsmooth);
}

TEST(Certify, EulerIsConditional) {
    auto u0 = InitialData::riemann(0, 1, 0.5, {1, 0, 2.5}, {0.125, 0, 0.25}, 3);
    auto q = request("euler1d", "beacons:8:128", report_for("euler1d", u0), 2);
    q.conditional = true;
    auto c = certify(q);
    EXPECT_TRUE(c.conditional);
    ASSERT_EQ(c.assumptions.size(), 1u);
    EXPECT_EQ(c.assumptions[0], "training-data correctness assumed");
    EXPECT_TRUE(check_bound_certificate(c).accepted);
}

TEST(Certify, SmoothDataHasNoNonsmoothParts) {
    auto u0 = InitialData::smooth(0, 6.283185307179586, Form::sum_of_sines({{1, 1, 0}}));
    auto c = certify(request("advection1d", "beacons:4:32", report_for("advection1d", u0), 2));
    EXPECT_FALSE(c.bound_nonsmooth);
    EXPECT_EQ(c.no_bound_reason, "no non-smooth parts");
    EXPECT_LT(c.bound_smooth, 1.0);
}

TEST(Certify, PlainIsInformational) {
    auto c = certify(request("advection1d", "plain:6:64", advection_step(), 2));
    EXPECT_TRUE(c.informational);
    ASSERT_EQ(c.chain.stages.size(), 1u);
    EXPECT_EQ(c.chain.stages[0].N, 384);
    EXPECT_TRUE(check_bound_certificate(c).accepted);
}

TEST(Certify, RefusesBadRequests) {
    auto q = request("advection1d", "beacons:6:64", advection_step(), 2);
    q.maps.pop_back();
    try {
        certify(q);
        FAIL();
    } catch (const CertificateRefused& e) {
        EXPECT_EQ(e.code, "chain_shape");
    }
    q = request("advection1d", "beacons:3:8", advection_step(), 2);
    q.maps[0] = {MapForm::arctan, 2.0};
    EXPECT_THROW(certify(q), CertificateRefused);
}

TEST(Checker, RoundTripReplaysBitExactly) {
    auto q = request("advection1d", "beacons:6:64", advection_step(), 2);
    q.maps = {{MapForm::arcsinh, 2.0}, {MapForm::tanh, 0.5}, {MapForm::identity, 1.0}, {MapForm::arctan, 1.0},
              {MapForm::arcsinh, 0.25}};
    auto c = certify(q);
    auto text = certificate_text(c);
    auto back = bound_certificate_from_json(nlohmann::json::parse(text));
    auto r = check_bound_certificate(back);
    EXPECT_TRUE(r.accepted) << r.reason;
    EXPECT_EQ(back.bound_smooth, c.bound_smooth);
    EXPECT_EQ(*back.bound_nonsmooth, *c.bound_nonsmooth);
    EXPECT_EQ(certificate_text(back), text);
}

TEST(Checker, RejectsTampering) {
    auto c = certify(request("burgers1d", "beacons:4:32",
                             report_for("burgers1d", InitialData::top_hat(0, 6, 2, 4, 3, -1)), 2));
    ASSERT_TRUE(check_bound_certificate(c).accepted);

    auto t = c;
    t.bound_nonsmooth = next_up(*t.bound_nonsmooth);
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    t = c;
    t.bound_smooth = next_up(t.bound_smooth);
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    for (size_t k = 0; k < c.derivation.size(); ++k) {
        t = c;
        t.derivation[k].output = next_up(t.derivation[k].output);
        auto r = check_bound_certificate(t);
        EXPECT_FALSE(r.accepted);
        EXPECT_EQ(r.failing_step, static_cast<int>(k));
    }

    t = c;
    t.derivation[0].inputs[0] = 1e6;
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    t = c;
    t.chain.stages[3].map.C = 2.0;
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    t = c;
    t.step_count += 1;
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    t = c;
    t.conditional = true;
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    t = c;
    t.bound_nonsmooth.reset();
    t.no_bound_reason = "discontinuity set is asymptotically empty";
    EXPECT_FALSE(check_bound_certificate(t).accepted);

    EXPECT_THROW(bound_certificate_from_json(nlohmann::json::parse("{\"version\": 1}")), std::invalid_argument);
}

TEST(Candidates, StepDataPrefersIdentity) {
    std::vector<double> x, z;
    for (int i = 0; i < 400; ++i) {
        double v = -1.0 + 2.0 * i / 399;
        x.push_back(v);
        z.push_back(v < 0.1 ? 1.0 : -1.0);
    }
    CandidateBudget b;
    auto rep = candidate_search(x, z, 1, 3, b);
    ASSERT_EQ(rep.chosen.size(), 3u);
    for (auto& m : rep.chosen) EXPECT_EQ(m.form, MapForm::identity);
    int inadmissible = 0, flagged = 0;
    for (auto& t : rep.trials) {
        if (!t.admissible) {
            ++inadmissible;
            EXPECT_EQ(t.map.form, MapForm::arctan);
            EXPECT_GE(t.map.C, std::numbers::pi / 2);
        }
        if (t.map.form == MapForm::identity) {
            EXPECT_FALSE(t.flag.empty());
            ++flagged;
        }
        if (t.admissible && t.map.form == MapForm::arcsinh && t.map.C == 2.0) {
            AnalyticMap m{MapForm::arcsinh, 2.0};
            EXPECT_EQ(m.lipschitz(), 0.5);
        }
    }
    EXPECT_EQ(inadmissible, 3 * 2);
    EXPECT_EQ(flagged, 3 * 5);
    // identity is invariant in C
    for (auto& t : rep.trials)
        if (t.map.form == MapForm::identity && t.stage == 2) {
            EXPECT_EQ(t.estimate, rep.trials[0].estimate);
        }

    auto again = candidate_search(x, z, 1, 3, b);
    ASSERT_EQ(again.trials.size(), rep.trials.size());
    for (size_t k = 0; k < rep.trials.size(); ++k) EXPECT_EQ(again.trials[k].estimate, rep.trials[k].estimate);
}

TEST(Candidates, SmoothDataTrialsEveryForm) {
    std::vector<double> x, z;
    for (int i = 0; i < 300; ++i) {
        double v = -1.0 + 2.0 * i / 299;
        x.push_back(v);
        z.push_back(std::tanh(4 * v) / std::tanh(4.0));
    }
    auto rep = candidate_search(x, z, 1, 1, CandidateBudget{});
    ASSERT_EQ(rep.chosen.size(), 1u);
    EXPECT_GT(rep.estimate, 0.0);
    EXPECT_TRUE(std::isfinite(rep.estimate));
    EXPECT_EQ(rep.trials.size(), 20u);
}

TEST(Candidates, ConstantRangeIsIdentity) {
    std::vector<double> x{-1, 0, 1}, z{0.3, 0.3, 0.3};
    auto rep = candidate_search(x, z, 1, 4, CandidateBudget{});
    ASSERT_EQ(rep.chosen.size(), 4u);
    for (auto& m : rep.chosen) EXPECT_EQ(m.form, MapForm::identity);
    EXPECT_FALSE(rep.warnings.empty());
    EXPECT_THROW(candidate_search(x, {}, 1, 1, CandidateBudget{}), std::invalid_argument);
}
