#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "beacons/frames_io.hpp"
#include "beacons/fv.hpp"
#include "support/exact_riemann.hpp"

using namespace beacons;

namespace {

double total_variation(const StateField& f) {
    double tv = 0;
    for (int i = 0; i + 1 < f.nx(); ++i) tv += std::abs(f.at(i + 1)[0] - f.at(i)[0]);
    return tv;
}

State random_valid(const PdeSystem& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-2.0, 2.0), pos(0.2, 3.0);
    if (s.kind != Kind::euler) return {U(rng)};
    return s.conserved({pos(rng), U(rng), s.dim == 2 ? U(rng) : 0.0, pos(rng)});
}

}  // namespace

TEST(Flux, LaxFriedrichsExamples) {
    auto adv = make_system("advection1d");
    auto bur = make_system("burgers1d");
    EXPECT_EQ(lax_friedrichs_flux(adv, {1.0}, {0.0}, 0)[0], 1.0);
    EXPECT_EQ(lax_friedrichs_flux(bur, {2.0}, {2.0}, 0)[0], 2.0);
    EXPECT_EQ(lax_friedrichs_flux(bur, {3.0}, {-1.0}, 0)[0], 8.5);
}

TEST(Flux, RoeExamples) {
    auto adv = make_system("advection1d");
    auto bur = make_system("burgers1d");
    EXPECT_EQ(roe_flux(bur, {3.0}, {-1.0}, 0)[0], 4.5);
    EXPECT_EQ(roe_flux(adv, {1.0}, {0.0}, 0)[0], 1.0);
    EXPECT_EQ(roe_flux(adv, {0.0}, {1.0}, 0)[0], 0.0);
}

TEST(Flux, EntropyFixWidensTransonicRarefaction) {
    auto bur = make_system("burgers1d");
    // unfixed Roe would return f(-1) = 0.5 with a stationary expansion shock
    double F = roe_flux(bur, {-1.0}, {3.0}, 0)[0];
    EXPECT_LT(F, 0.5);
    EXPECT_EQ(entropy_fixed_speed(2.0, 2.0, 2.0), 2.0);
}

TEST(Flux, ConsistencyBitExact) {
    std::mt19937_64 rng(3);
    for (auto& name : system_names()) {
        auto s = make_system(name);
        for (int k = 0; k < 1000; ++k) {
            State u = random_valid(s, rng);
            for (int dir = 0; dir < s.dim; ++dir) {
                auto f = s.flux(u, dir);
                auto a = lax_friedrichs_flux(s, u, u, dir);
                auto b = roe_flux(s, u, u, dir);
                for (int c = 0; c < s.m; ++c) {
                    ASSERT_EQ(a[c], f[c]) << name;
                    ASSERT_EQ(b[c], f[c]) << name;
                }
            }
        }
    }
}

TEST(Flux, EulerRoeResolvesIsolatedContact) {
    auto s = make_system("euler1d");
    State L = s.conserved({1.0, 0.3, 0, 1.0}), R = s.conserved({0.2, 0.3, 0, 1.0});
    auto F = roe_flux(s, L, R, 0);
    auto fL = s.flux(L, 0);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(F[c], fL[c], 1e-14);
}

TEST(Limiter, Values) {
    EXPECT_EQ(limiter_eval(Limiter::minmod, 2.0), 1.0);
    EXPECT_EQ(limiter_eval(Limiter::superbee, 0.5), 1.0);
    EXPECT_EQ(limiter_eval(Limiter::van_leer, -1.0), 0.0);
    for (Limiter l : {Limiter::minmod, Limiter::monotonized_centered, Limiter::van_leer, Limiter::superbee}) {
        EXPECT_EQ(limiter_eval(l, 1.0), 1.0);
        for (double th = -3; th <= 10; th += 0.01) {
            double p = limiter_eval(l, th);
            ASSERT_GE(p, 0.0);
            ASSERT_LE(p, 2.0);
            if (th > 0) {
                ASSERT_LE(p, 2.0 * th + 1e-15);
                // symmetry phi(th)/th = phi(1/th)
                ASSERT_NEAR(p / th, limiter_eval(l, 1.0 / th), 1e-12);
            }
        }
        EXPECT_LE(limiter_eval(l, INFINITY), 2.0);
        EXPECT_EQ(limiter_eval(l, -INFINITY), 0.0);
    }
}

TEST(Step, ConstantFieldUnchanged) {
    for (auto& name : system_names()) {
        auto s = make_system(name);
        GridSpec g = s.dim == 1 ? GridSpec::line(0, 1, 32) : GridSpec::square(0, 1, 16);
        State u = s.kind == Kind::euler ? s.conserved({1.0, 0.7, 0.7, 1.0}) : State{0.7};
        StateField f = sample_field(s, g, [&](double, double) { return u; });
        for (Limiter l : {Limiter::none, Limiter::minmod}) {
            SolverConfig cfg{FluxKind::roe, l, 0.9, 1.0, 2};
            StateField h = f;
            step(s, h, cfg);
            EXPECT_TRUE(h.same_interior(f)) << name;
        }
    }
}

TEST(Step, AdvectionStepMovesOneCellAtUnitCfl) {
    auto s = make_system("advection1d");
    auto g = GridSpec::line(-1, 1, 64);
    StateField f = sample_field(s, g, [](double x, double) { return State{x < 0 ? 1.0 : 0.0}; });
    SolverConfig cfg{FluxKind::roe, Limiter::none, 1.0, 1.0, 2};
    StateField h = f;
    auto info = step_1d(s, h, cfg);
    EXPECT_DOUBLE_EQ(info.dt, g.dx(0));
    for (int i = 1; i < 64; ++i) EXPECT_EQ(h.at(i)[0], f.at(i - 1)[0]);
}

TEST(Step, ConservationTelescopes) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-1, 1);
    for (auto name : {"advection1d", "burgers1d", "euler1d"}) {
        auto s = make_system(name);
        auto g = GridSpec::line(0, 1, 100);
        for (Limiter l : {Limiter::none, Limiter::minmod, Limiter::superbee}) {
            StateField f(g, s.m);
            for (int i = 0; i < 100; ++i)
                f.at(i) = s.kind == Kind::euler ? s.conserved({1.0 + 0.5 * U(rng), 0.3 * U(rng), 0, 1.0 + 0.5 * U(rng)})
                                                : State{U(rng)};
            SolverConfig cfg{FluxKind::roe, l, 0.8, 1.0, 2};
            for (int k = 0; k < 20; ++k) {
                State before = f.totals();
                auto info = step_1d(s, f, cfg);
                State after = f.totals();
                for (int c = 0; c < s.m; ++c) {
                    double expect = before[c] - info.dt * (info.flux_hi[c] - info.flux_lo[c]);
                    EXPECT_NEAR(after[c], expect, 1e-12 * (1 + std::abs(before[c]))) << name;
                }
            }
        }
    }
}

TEST(Step, TvdScalar) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(-1, 1);
    for (auto name : {"advection1d", "burgers1d"}) {
        auto s = make_system(name);
        auto g = GridSpec::line(0, 1, 80);
        for (int trial = 0; trial < 100; ++trial) {
            StateField f(g, 1);
            bool monotone = trial % 2 == 0;
            double acc = 0;
            for (int i = 0; i < 80; ++i) {
                acc += monotone ? std::abs(U(rng)) * 0.05 : 0;
                f.at(i)[0] = monotone ? acc - 1.0 : U(rng);
            }
            for (Limiter l : {Limiter::none, Limiter::minmod, Limiter::monotonized_centered, Limiter::van_leer,
                              Limiter::superbee}) {
                for (FluxKind fk : {FluxKind::roe, FluxKind::lax_friedrichs}) {
                    StateField h = f;
                    SolverConfig cfg{fk, l, 0.9, 1.0, 2};
                    for (int k = 0; k < 5; ++k) {
                        double tv0 = total_variation(h);
                        step_1d(s, h, cfg);
                        ASSERT_LE(total_variation(h), tv0 * (1 + 1e-12) + 1e-14)
                            << name << " " << to_string(l) << " " << to_string(fk) << " trial " << trial;
                    }
                }
            }
        }
    }
}

TEST(Step, TwoDimensionalRowsMatchOneDimensional) {
    auto s2 = make_system("advection2d");
    auto s1 = make_system("advection1d");
    auto g2 = GridSpec::square(-1, 1, 32);
    auto g1 = GridSpec::line(-1, 1, 32);
    auto u0 = [](double x, double) { return State{x < 0.1 ? 1.0 : 0.0}; };
    StateField f2 = sample_field(s2, g2, u0), f1 = sample_field(s1, g1, u0);
    SolverConfig cfg{FluxKind::roe, Limiter::minmod, 0.7, 1.0, 2};
    for (int k = 0; k < 10; ++k) {
        auto info = step_2d(s2, f2, cfg);
        step_1d(s1, f1, cfg, 0.5 * info.dt);
        step_1d(s1, f1, cfg, 0.5 * info.dt);
        for (int j = 0; j < 32; ++j)
            for (int i = 0; i < 32; ++i) ASSERT_NEAR(f2.at(i, j)[0], f1.at(i)[0], 1e-12);
    }
}

TEST(Step, DiskMovesDiagonally) {
    auto s = make_system("advection2d");
    auto g = GridSpec::square(-1, 1, 128);
    auto u0 = [](double x, double y) {
        return State{(x + 0.5) * (x + 0.5) + (y + 0.5) * (y + 0.5) <= 0.1 ? 1.0 : 0.0};
    };
    SolverConfig cfg{FluxKind::roe, Limiter::minmod, 1.0, 0.2, 2};
    auto series = run_simulation(s, g, u0, cfg);
    auto centroid = [](const StateField& f) {
        double m = 0, cx = 0, cy = 0;
        f.for_interior([&](int i, int j, const State& u) {
            m += u[0];
            cx += u[0] * f.grid.center(0, i);
            cy += u[0] * f.grid.center(1, j);
        });
        return std::pair{cx / m, cy / m};
    };
    auto [x0, y0] = centroid(series.frames[0]);
    auto [x1, y1] = centroid(series.frames[1]);
    EXPECT_NEAR(x1 - x0, 0.2, g.dx(0));
    EXPECT_NEAR(y1 - y0, 0.2, g.dx(1));
}

TEST(Run, FrameTimesAndDeterminism) {
    auto s = make_system("burgers1d");
    auto g = GridSpec::line(0, 6, 128);
    auto u0 = [](double x, double) { return State{x >= 2 && x <= 4 ? 3.0 : -1.0}; };
    SolverConfig cfg{FluxKind::roe, Limiter::minmod, 1.0, 1.0, 11};
    auto a = run_simulation(s, g, u0, cfg);
    auto b = run_simulation(s, g, u0, cfg);
    ASSERT_EQ(a.times.size(), 11u);
    EXPECT_EQ(a.times[0], 0.0);
    EXPECT_EQ(a.times.back(), 1.0);
    for (int k = 0; k < 11; ++k) EXPECT_TRUE(a.frames[k].same_interior(b.frames[k]));
}

TEST(Run, ZeroSpeedGivesConstantFrames) {
    auto s = make_system("advection1d", {0.0, 1.4});
    auto g = GridSpec::line(0, 1, 16);
    auto series = run_simulation(s, g, [](double x, double) { return State{x}; }, {FluxKind::roe, Limiter::none, 1, 1, 4});
    for (auto& f : series.frames) EXPECT_TRUE(f.same_interior(series.frames[0]));
}

TEST(Run, SodMatchesExactSolution) {
    auto s = make_system("euler1d");
    auto g = GridSpec::line(0, 1, 2048);
    auto u0 = [&](double x, double) { return x < 0.5 ? State{1.0, 0.0, 2.5} : State{0.125, 0.0, 0.25}; };
    auto series = run_simulation(s, g, u0, {FluxKind::roe, Limiter::minmod, 0.95, 0.2, 2});
    oracle::ExactRiemann ex({1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}, 1.4);
    double l1 = 0;
    for (int i = 0; i < 2048; ++i)
        l1 += std::abs(series.frames[1].at(i)[0] - ex.sample((g.center(0, i) - 0.5) / 0.2).rho) * g.dx(0);
    EXPECT_LT(l1, 0.01);
}

TEST(Run, ExactRiemannOracleStarState) {
    oracle::ExactRiemann ex({1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}, 1.4);
    // classic Sod star values
    EXPECT_NEAR(ex.p_star(), 0.30313, 1e-5);
    EXPECT_NEAR(ex.u_star(), 0.92745, 1e-5);
}

TEST(Run, ConvergenceOrders) {
    auto s = make_system("advection1d");
    auto exact = [](double x) { return std::sin(std::numbers::pi * x); };
    auto order = [&](Limiter l) {
        std::vector<double> err;
        for (int n : {64, 128, 256, 512}) {
            auto g = GridSpec::line(-1, 1, n, Boundary::periodic);
            auto series = run_simulation(s, g, [&](double x, double) { return State{exact(x)}; },
                                         {FluxKind::roe, l, 0.5, 0.5, 2});
            double e = 0;
            for (int i = 0; i < n; ++i) e += std::abs(series.frames[1].at(i)[0] - exact(g.center(0, i) - 0.5)) * g.dx(0);
            err.push_back(e);
        }
        return std::log2(err[2] / err[3]);
    };
    EXPECT_GE(order(Limiter::none), 0.9);
    EXPECT_GE(order(Limiter::minmod), 1.7);
}

TEST(FramesIo, CsvRoundTrip) {
    auto s = make_system("euler2d");
    auto g = GridSpec::square(0, 1, 8);
    auto series = run_simulation(s, g, [&](double x, double y) {
        return s.conserved({1.0 + 0.1 * x, 0.1 * y, 0.2, 1.0 / 3.0});
    }, {FluxKind::roe, Limiter::minmod, 0.9, 0.01, 3});
    auto dir = std::filesystem::temp_directory_path() / "beacons_frames_rt";
    std::filesystem::remove_all(dir);
    write_frames(series, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "frame_0002.csv"));
    auto back = read_frames(dir);
    ASSERT_EQ(back.frames.size(), 3u);
    EXPECT_EQ(back.times, series.times);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(back.frames[k].same_interior(series.frames[k]));
    std::string head = frame_csv(series.frames[0], series.components).substr(0, 30);
    EXPECT_EQ(head.rfind("i,j,x,y,rho,mom_x,mom_y,energy", 0), 0u);
    std::filesystem::remove_all(dir);
}
