#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "beacons/checkpoint.hpp"

using namespace beacons;

namespace {

Mlp single_neuron() {
    Mlp n = shallow_mlp(1, 1, 1, 0);
    n.set_params({1.0, 0.0, 1.0, 0.0});
    return n;
}

Mlp zero_net(int d_in, int N, int d_out, double b2) {
    Mlp n = shallow_mlp(d_in, N, d_out, 0);
    std::vector<double> p(n.param_count(), 0.0);
    n.set_params(p);
    for (auto& v : n.layers.back().b) v = b2;
    return n;
}

// Central differences of a scalar function of the parameters.
template <class F> std::vector<double> fd_grad(Mlp net, F&& loss, double h) {
    auto th = net.params();
    std::vector<double> g(th.size());
    for (size_t p = 0; p < th.size(); ++p) {
        auto a = th, b = th;
        a[p] += h;
        b[p] -= h;
        net.set_params(a);
        double la = loss(net);
        net.set_params(b);
        double lb = loss(net);
        g[p] = (la - lb) / (2 * h);
    }
    return g;
}

// Relative agreement with a floor tied to the gradient's overall size, so
// coordinates that are zero up to rounding do not demand relative accuracy.
void expect_grad_close(const std::vector<double>& a, const std::vector<double>& fd, double rel) {
    ASSERT_EQ(a.size(), fd.size());
    double big = 0.0;
    for (double v : fd) big = std::max(big, std::abs(v));
    for (size_t p = 0; p < a.size(); ++p) {
        double scale = std::max(std::abs(fd[p]), 1e-3 * big + 1e-12);
        EXPECT_LE(std::abs(a[p] - fd[p]), rel * scale) << "parameter " << p << " analytic " << a[p] << " fd " << fd[p];
    }
}

Dataset random_dataset(std::mt19937_64& rng, int d_in, int d_out, int n) {
    std::uniform_real_distribution<double> U(-1, 1);
    Dataset d;
    d.d_in = d_in;
    d.d_out = d_out;
    std::vector<double> x(d_in), y(d_out);
    for (int s = 0; s < n; ++s) {
        for (auto& v : x) v = U(rng);
        for (auto& v : y) v = U(rng);
        d.add(x.data(), y.data());
    }
    return d;
}

}  // namespace

TEST(Mlp, ForwardExamples) {
    double x[2] = {0.7, -3.0};
    EXPECT_EQ(zero_net(2, 5, 1, 0.3).forward(x)[0], 0.3);
    auto n = single_neuron();
    double z = 0.0, ten = 10.0;
    EXPECT_EQ(n.forward(&z)[0], 0.0);
    EXPECT_NEAR(n.forward(&ten)[0], 0.9999999958776927, 1e-16);
}

TEST(Mlp, ParameterCountAndLayout) {
    for (int N : {1, 7, 64})
        for (int d : {1, 2, 3}) {
            Mlp n = shallow_mlp(d, N, 1, 3);
            EXPECT_EQ(n.param_count(), static_cast<size_t>(1 + (d + 2) * N));
        }
    Mlp n = shallow_mlp(3, 4, 2, 1);
    EXPECT_EQ(n.param_count(), static_cast<size_t>(2 + (3 + 2 + 1) * 4));
    auto p = n.params();
    EXPECT_EQ(p[0], n.layers[0].W[0]);
    EXPECT_EQ(p[12], n.layers[0].b[0]);
    EXPECT_EQ(p[16], n.layers[1].W[0]);
    EXPECT_EQ(p.back(), n.layers[1].b[1]);
    for (double v : n.layers[0].W) EXPECT_LE(std::abs(v), 1.0 / std::sqrt(3.0));
    for (double v : n.layers[1].W) EXPECT_LE(std::abs(v), 0.5);
}

TEST(Mlp, InputJacobian) {
    double x[3] = {0.1, 0.2, 0.3};
    for (double v : zero_net(3, 4, 2, 0.5).input_jacobian(x)) EXPECT_EQ(v, 0.0);
    double z = 0.0;
    EXPECT_EQ(single_neuron().input_jacobian(&z)[0], 1.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        int d_in = 1 + trial % 3, d_out = 1 + trial % 2;
        Mlp n = trial % 4 == 3 ? deep_mlp(d_in, 3, 6, d_out, trial) : shallow_mlp(d_in, 8, d_out, trial);
        std::vector<double> p(d_in);
        for (auto& v : p) v = U(rng);
        auto J = n.input_jacobian(p);
        for (int j = 0; j < d_in; ++j) {
            double h = 1e-6 * (1 + std::abs(p[j]));
            auto a = p, b = p;
            a[j] += h;
            b[j] -= h;
            auto fa = n.forward(a), fb = n.forward(b);
            for (int o = 0; o < d_out; ++o) {
                double fd = (fa[o] - fb[o]) / (2 * h);
                EXPECT_NEAR(J[o * d_in + j], fd, 1e-5 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST(Losses, SupervisedExamples) {
    std::mt19937_64 rng(2);
    Mlp n = shallow_mlp(2, 6, 2, 9);
    Dataset d = random_dataset(rng, 2, 2, 30);
    for (size_t s = 0; s < d.size(); ++s) {
        auto u = n.forward(&d.X[2 * s]);
        d.Y[2 * s] = u[0];
        d.Y[2 * s + 1] = u[1];
    }
    auto lg = loss_and_grad_supervised(n, d);
    EXPECT_EQ(lg.loss, 0.0);
    for (double g : lg.grad) EXPECT_EQ(g, 0.0);

    // One scalar sample: loss r^2, gradient 2 r du/dtheta.
    Mlp s = shallow_mlp(1, 5, 1, 4);
    Dataset one;
    one.d_in = one.d_out = 1;
    double x = 0.3, y = -0.4;
    one.add(&x, &y);
    double r = s.forward(&x)[0] - y;
    lg = loss_and_grad_supervised(s, one);
    EXPECT_DOUBLE_EQ(lg.loss, r * r);
    auto du = fd_grad(s, [&](const Mlp& m) { return m.forward(&x)[0]; }, 1e-6);
    for (size_t p = 0; p < du.size(); ++p) EXPECT_NEAR(lg.grad[p], 2 * r * du[p], 1e-8);

    std::vector<double> bad{1.0, 2.0, 2.0, 1.0};  // eigenvalues 3, -1
    EXPECT_THROW(loss_and_grad_supervised(n, d, &bad), std::invalid_argument);
    std::vector<double> asym{1.0, 0.5, 0.0, 1.0};
    EXPECT_THROW(loss_and_grad_supervised(n, d, &asym), std::invalid_argument);
    std::vector<double> psd{1.0, 1.0, 1.0, 1.0};  // singular but PSD
    EXPECT_NO_THROW(loss_and_grad_supervised(n, d, &psd));
    Dataset wrong = random_dataset(rng, 3, 2, 4);
    EXPECT_THROW(loss_and_grad_supervised(n, wrong), std::invalid_argument);
}

TEST(Losses, ProbeNetHasFiftyParameters) { EXPECT_EQ(shallow_mlp(1, 12, 2, 0).param_count(), 50u); }

TEST(Losses, SupervisedGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Mlp n = trial % 5 == 4 ? deep_mlp(1, 2, 5, 2, 100 + trial) : shallow_mlp(1, 12, 2, 100 + trial);
        Dataset d = random_dataset(rng, 1, 2, 40);
        std::vector<double> W{2.0, 0.5, 0.5, 1.0};
        const std::vector<double>* w = trial % 2 ? &W : nullptr;
        auto lg = loss_and_grad_supervised(n, d, w);
        auto fd = fd_grad(n, [&](const Mlp& m) { return loss_and_grad_supervised(m, d, w).loss; }, 1e-5);
        expect_grad_close(lg.grad, fd, 1e-4);
    }
}

TEST(Losses, ChunkingDoesNotDependOnThreadCount) {
    std::mt19937_64 rng(3);
    Mlp n = deep_mlp(2, 2, 8, 1, 7);
    Dataset d = random_dataset(rng, 2, 1, 1500);
    auto a = loss_and_grad_supervised(n, d);
    setenv("BEACONS_THREADS", "3", 1);
    auto b = loss_and_grad_supervised(n, d);
    unsetenv("BEACONS_THREADS");
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_EQ(a.grad, b.grad);
}

namespace {

ResidualProblem residual_problem(const PdeSystem& sys, std::mt19937_64& rng, int n_int, int n_bc) {
    ResidualProblem pb;
    pb.sys = &sys;
    std::vector<std::pair<double, double>> axes{{0.0, 1.0}, {-1.0, 1.0}};
    if (sys.dim == 2) axes.push_back({0.0, 2.0});
    pb.inputs = Normalizer::box(axes);
    const int nin = 1 + sys.dim;
    std::uniform_real_distribution<double> U(0, 1);
    for (int s = 0; s < n_int; ++s)
        for (int k = 0; k < nin; ++k)
            pb.interior.push_back(pb.inputs.lo[k] + (pb.inputs.hi[k] - pb.inputs.lo[k]) * U(rng));
    for (int s = 0; s < n_bc; ++s) {
        pb.boundary.push_back(U(rng));
        pb.boundary.push_back(s % 2 ? -1.0 : 1.0);
        if (sys.dim == 2) pb.boundary.push_back(2.0 * U(rng));
        for (int c = 0; c < sys.m; ++c) pb.boundary_u.push_back(0.5 + U(rng));
    }
    return pb;
}

// Nets whose outputs stay in the physical region (positive density and
// pressure) for the Euler residual.
Mlp residual_net(const PdeSystem& sys, uint64_t seed) {
    Mlp n = shallow_mlp(1 + sys.dim, 6, sys.m, seed);
    for (auto& w : n.layers.back().W) w *= 0.1;
    if (sys.kind == Kind::euler) {
        n.layers.back().b.assign(sys.m, 0.2);
        n.layers.back().b[0] = 1.0;
        n.layers.back().b[sys.m - 1] = 2.5;
    }
    return n;
}

}  // namespace

TEST(Losses, ResidualGradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(21);
    const std::vector<std::string> systems{"advection1d", "burgers1d", "euler1d", "burgers2d", "euler2d"};
    for (int trial = 0; trial < 20; ++trial) {
        PdeSystem sys = make_system(systems[trial % systems.size()]);
        auto pb = residual_problem(sys, rng, 12, 4);
        pb.lambda_pde = 0.7;
        pb.lambda_bc = 1.3;
        Mlp n = residual_net(sys, 300 + trial);
        std::vector<double> W(sys.m * sys.m, 0.0);
        for (int c = 0; c < sys.m; ++c) W[c * sys.m + c] = 1.0 + c;
        const std::vector<double>* w = trial % 2 ? &W : nullptr;
        auto lg = loss_and_grad_residual(n, pb, w);
        auto fd = fd_grad(n, [&](const Mlp& m) { return loss_and_grad_residual(m, pb, w).loss; }, 1e-5);
        expect_grad_close(lg.grad, fd, 1e-4);
    }
}

TEST(Losses, ResidualExamples) {
    std::mt19937_64 rng(8);
    PdeSystem adv = make_system("advection1d");
    auto pb = residual_problem(adv, rng, 50, 6);
    pb.inputs = Normalizer::box({{-1.0, 1.0}, {-1.0, 1.0}});  // identity map

    Mlp c = zero_net(2, 4, 1, 0.8);
    pb.lambda_bc = 0.0;
    EXPECT_EQ(loss_and_grad_residual(c, pb).loss, 0.0);

    // u = tanh(x - a t) solves u_t + a u_x = 0.
    Mlp tr = shallow_mlp(2, 1, 1, 0);
    tr.set_params({-adv.params.a, 1.0, 0.0, 1.0, 0.0});
    EXPECT_LT(loss_and_grad_residual(tr, pb).loss, 1e-20);

    Mlp r = shallow_mlp(2, 5, 1, 12);
    pb.lambda_bc = 2.5;
    auto full = pb;
    full.lambda_pde = 0.0;
    auto bc_only = pb;
    bc_only.lambda_pde = 0.0;
    bc_only.interior.clear();
    EXPECT_EQ(loss_and_grad_residual(r, full).loss, loss_and_grad_residual(r, bc_only).loss);
    auto one = pb;
    one.lambda_pde = 0.0;
    one.lambda_bc = 1.0;
    EXPECT_DOUBLE_EQ(loss_and_grad_residual(r, full).loss, 2.5 * loss_and_grad_residual(r, one).loss);
}

TEST(Train, ConstantFieldReachesSmallLoss) {
    Dataset d;
    d.d_in = 2;
    d.d_out = 1;
    for (int i = 0; i < 64; ++i) {
        double x[2] = {-1.0 + i / 32.0, std::sin(i * 1.0)}, y = 0.6;
        d.add(x, &y);
    }
    Mlp n = deep_mlp(2, 2, 16, 1, 1);
    TrainConfig cfg;
    cfg.lr = 0.2;
    cfg.steps_per_epoch = 400;
    auto res = train_supervised(n, d, cfg);
    EXPECT_LT(res.final_loss, 1e-6);
    EXPECT_GE(res.epochs, cfg.min_epochs);
    EXPECT_LE(res.epochs, cfg.max_epochs);
    EXPECT_EQ(res.loss_history.size(), static_cast<size_t>(res.epochs));
}

TEST(Train, StopsOnlyAfterMinimumEpochs) {
    Dataset d;
    d.d_in = d.d_out = 1;
    double x = 0.0, y = 0.0;
    d.add(&x, &y);
    Mlp n = zero_net(1, 2, 1, 0.0);  // already optimal: every step is zero
    TrainConfig cfg;
    cfg.min_epochs = 3;
    cfg.steps_per_epoch = 5;
    auto res = train_supervised(n, d, cfg);
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.epochs, 3);
    EXPECT_EQ(res.steps, 11);
}

TEST(Train, DivergenceAborts) {
    std::mt19937_64 rng(1);
    Dataset d = random_dataset(rng, 1, 1, 20);
    for (auto& y : d.Y) y *= 1e3;
    Mlp n = shallow_mlp(1, 4, 1, 2);
    TrainConfig cfg;
    cfg.lr = 1e3;
    EXPECT_THROW(train_supervised(n, d, cfg), std::runtime_error);
    cfg.lr = -1.0;
    EXPECT_THROW(train_supervised(n, d, cfg), std::invalid_argument);
}

TEST(Train, SeededRunsAreBitIdentical) {
    std::mt19937_64 rng(4);
    Dataset d = random_dataset(rng, 2, 1, 700);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.max_epochs = 2;
    cfg.min_epochs = 1;
    cfg.steps_per_epoch = 20;
    Mlp a = deep_mlp(2, 2, 8, 1, 42), b = deep_mlp(2, 2, 8, 1, 42);
    train_supervised(a, d, cfg);
    train_supervised(b, d, cfg);
    EXPECT_EQ(a.params(), b.params());
    EXPECT_NE(deep_mlp(2, 2, 8, 1, 43).params(), deep_mlp(2, 2, 8, 1, 42).params());
}

TEST(Beacons, AnalyticMapsInvertExactly) {
    AnalyticMap m{MapForm::arcsinh, 2.0};
    EXPECT_EQ(m.inverse(0.0), 0.0);
    EXPECT_NEAR(m.inverse(1.0), 3.626860407847019, 1e-15);
    EXPECT_EQ(m.lipschitz(), 0.5);
    EXPECT_TRUE(AnalyticMap({MapForm::arctan, 2.0}).inadmissible());
    EXPECT_FALSE(AnalyticMap({MapForm::arctan, 1.0}).inadmissible());
    for (auto form : {MapForm::identity, MapForm::arcsinh, MapForm::arctan, MapForm::tanh})
        for (double C : {0.25, 0.5, 1.0, 1.5}) {
            AnalyticMap a{form, C};
            EXPECT_NEAR(a.normalized(1.0), 1.0, 1e-14);
            EXPECT_NEAR(a.normalized(-1.0), -1.0, 1e-14);
            for (double z = -1.0; z <= 1.0; z += 0.125) EXPECT_NEAR(a.normalized(a.normalized_inverse(z)), z, 1e-12);
            // Numerical Lipschitz constant on the domain never exceeds the recorded one.
            double G = a.domain(), Lmax = 0.0;
            for (int k = 0; k < 2000; ++k) {
                double x0 = -G + 2 * G * k / 2000, x1 = -G + 2 * G * (k + 1) / 2000;
                Lmax = std::max(Lmax, std::abs(a.f(x1) - a.f(x0)) / (x1 - x0));
            }
            EXPECT_LE(Lmax, a.lipschitz() * (1 + 1e-9));
        }
}

TEST(Beacons, TargetsComposeBackToTheField) {
    BeaconsChain ch;
    ch.lo = -1.0;
    ch.hi = 3.0;
    for (auto m : {AnalyticMap{MapForm::arcsinh, 2.0}, AnalyticMap{MapForm::tanh, 1.0}, AnalyticMap{MapForm::arctan, 0.5}})
        ch.stages.push_back({m, {}, 0.0});
    for (double u = -1.0; u <= 3.0; u += 0.01) {
        double z = ch.to_unit(u);
        EXPECT_NEAR(ch.from_unit(ch.compose_exact(ch.head_target(z))), u, 1e-12);
    }
}

namespace {

FrameSeries step_frames() {
    PdeSystem sys = make_system("advection1d");
    SolverConfig cfg;
    cfg.t_end = 0.3;
    cfg.frame_count = 7;
    return run_simulation(sys, GridSpec::line(-1, 1, 64), [](double x, double) { return State{x <= 0 ? 1.0 : 0.0}; },
                          cfg);
}

BeaconsTraining quick_training() {
    BeaconsTraining bt;
    bt.head.lr = 0.1;
    bt.head.min_epochs = 1;
    bt.head.max_epochs = 3;
    bt.head.steps_per_epoch = 50;
    bt.stage = bt.head;
    bt.stage.seed = 9;
    return bt;
}

}  // namespace

TEST(Beacons, StepTargetsThroughArcsinh) {
    auto s = step_frames();
    Dataset d = frames_dataset(s, 0, 1);
    BeaconsChain ch;
    ch.lo = 0.0;
    ch.hi = 1.0;
    ch.stages.push_back({{MapForm::arcsinh, 2.0}, {}, 0.0});
    // Unnormalized head values g = sinh(C z): the step lands exactly on {-sinh 2, sinh 2}.
    for (size_t k = 0; k < d.size(); ++k) {
        double g = ch.stages[0].map.inverse(ch.to_unit(d.Y[k]));
        EXPECT_NEAR(std::abs(g), 3.626860407847019, 1e-15);
    }
}

TEST(Beacons, TrainInferAndCheckpoint) {
    auto s = step_frames();
    Dataset d = frames_dataset(s, 0, 4, 2);
    EXPECT_EQ(d.size(), 4u * 32u);
    Normalizer in = frames_normalizer(s);
    auto bt = quick_training();
    ArchitectureSpec arch{ArchKind::beacons, 3, 8};
    std::vector<std::vector<AnalyticMap>> maps{{{MapForm::arcsinh, 1.0}, {MapForm::identity, 1.0}}};
    DeepNet net = train_beacons(d, in, arch, maps, bt);
    ASSERT_EQ(net.chains.size(), 1u);
    EXPECT_EQ(net.chains[0].stages.size(), 2u);
    EXPECT_GT(net.chains[0].e_g, 0.0);
    EXPECT_EQ(net.history.size(), 3u);

    // Training point reproduces the composed prediction bit-exactly.
    double xn[2];
    in.apply(&d.X[0], xn);
    EXPECT_EQ(infer(net, {d.X[0], d.X[1]})[0][0], net.chains[0].eval(xn));

    // Far extrapolation stays finite and inside the last stage's output bound.
    const double B = net.chains[0].stages.back().net.output_bound();
    for (double t : {0.9, 3.0, 30.0})
        for (double x : {-1.0, 0.0, 0.7}) {
            double u = infer(net, {t, x})[0][0];
            EXPECT_TRUE(std::isfinite(u));
            EXPECT_LE(std::abs(net.chains[0].to_unit(u)), B + 1e-12);
        }

    auto j = checkpoint_json(net);
    DeepNet back = checkpoint_from_json(nlohmann::json::parse(j.dump()));
    for (double t : {0.0, 0.2, 0.9})
        for (double x : {-0.5, 0.01, 0.5}) EXPECT_EQ(infer(back, {t, x})[0][0], infer(net, {t, x})[0][0]);
    EXPECT_EQ(checkpoint_json(back).dump(), j.dump());

    DeepNet again = train_beacons(d, in, arch, maps, bt);
    EXPECT_EQ(checkpoint_json(again).dump(), j.dump());

    maps[0].pop_back();
    EXPECT_THROW(train_beacons(d, in, arch, maps, bt), std::invalid_argument);
}

TEST(Beacons, IdentityChainIsTheHeadComposition) {
    auto s = step_frames();
    Dataset d = frames_dataset(s, 0, 3, 4);
    auto bt = quick_training();
    DeepNet net = train_beacons(d, frames_normalizer(s), {ArchKind::beacons, 2, 6}, {{{MapForm::identity, 1.0}}}, bt);
    const auto& ch = net.chains[0];
    double xn[2] = {0.1, -0.3};
    double h = ch.head.forward(xn)[0];
    EXPECT_EQ(ch.eval_unit(xn), ch.stages[0].net.forward(&h)[0]);
}

TEST(Plain, TrainsAndRoundTrips) {
    auto s = step_frames();
    Dataset d = frames_dataset(s, 0, 4, 2);
    TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.min_epochs = 1;
    cfg.max_epochs = 2;
    cfg.steps_per_epoch = 30;
    DeepNet net = train_plain(d, frames_normalizer(s), {ArchKind::plain, 3, 8}, cfg);
    EXPECT_EQ(net.plain.hidden_layers(), 3);
    auto back = checkpoint_from_json(checkpoint_json(net));
    EXPECT_EQ(infer(back, {0.5, 0.25})[0][0], infer(net, {0.5, 0.25})[0][0]);
    EXPECT_THROW(ArchitectureSpec::parse("plain:1:8"), std::invalid_argument);
    EXPECT_THROW(ArchitectureSpec::parse("deep:4:8"), std::invalid_argument);
    EXPECT_THROW(ArchitectureSpec::parse("plain:4"), std::invalid_argument);
    auto a = ArchitectureSpec::parse("beacons:6:64");
    EXPECT_EQ(a.layers, 6);
    EXPECT_EQ(a.width, 64);
    EXPECT_EQ(a.id(), "beacons:6:64");
}
