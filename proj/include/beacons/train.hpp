// Full-batch gradient descent with an infinity-norm stopping rule.
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "losses.hpp"

namespace beacons {

struct TrainConfig {
    double lr = 1e-4;
    int min_epochs = 10;
    int max_epochs = 50;
    int steps_per_epoch = 200;
    double tol = 1e-10;  // stop once max |theta_{k+1} - theta_k| < tol
    uint64_t seed = 0;

    void validate() const {
        if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be positive");
        if (min_epochs < 0 || max_epochs < 1 || min_epochs > max_epochs)
            throw std::invalid_argument("need 0 <= min_epochs <= max_epochs, max_epochs >= 1");
        if (steps_per_epoch < 1) throw std::invalid_argument("steps_per_epoch must be >= 1");
        if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
    }
};

struct TrainResult {
    std::vector<double> loss_history;  // loss at the start of each epoch's last step
    int epochs = 0;
    long steps = 0;
    bool converged = false;
    bool monotone = true;  // reported, not enforced
    double final_loss = 0.0;
};

using LossFn = std::function<LossGrad(const Mlp&)>;

inline TrainResult train_with(Mlp& net, const LossFn& loss, const TrainConfig& cfg) {
    cfg.validate();
    TrainResult res;
    std::vector<double> theta = net.params();
    for (int e = 0; e < cfg.max_epochs && !res.converged; ++e) {
        for (int k = 0; k < cfg.steps_per_epoch; ++k) {
            LossGrad lg = loss(net);
            if (!std::isfinite(lg.loss)) {
                std::ostringstream os;
                os << "training diverged: non-finite loss at epoch " << e << " step " << k;
                throw std::runtime_error(os.str());
            }
            double dmax = 0.0;
            for (size_t p = 0; p < theta.size(); ++p) {
                const double d = cfg.lr * lg.grad[p];
                theta[p] -= d;
                dmax = std::max(dmax, std::abs(d));
            }
            net.set_params(theta);
            ++res.steps;
            res.final_loss = lg.loss;
            if (k + 1 == cfg.steps_per_epoch) res.loss_history.push_back(lg.loss);
            if (e + 1 >= cfg.min_epochs && dmax < cfg.tol) {
                res.converged = true;
                if (k + 1 != cfg.steps_per_epoch) res.loss_history.push_back(lg.loss);
                break;
            }
        }
        res.epochs = e + 1;
    }
    for (size_t k = 1; k < res.loss_history.size(); ++k)
        if (res.loss_history[k] > res.loss_history[k - 1]) res.monotone = false;
    if (!net.finite()) throw std::runtime_error("training produced non-finite parameters");
    return res;
}

inline TrainResult train_supervised(Mlp& net, const Dataset& data, const TrainConfig& cfg,
                                    const std::vector<double>* W = nullptr) {
    if (data.size() == 0) throw std::invalid_argument("empty training data");
    return train_with(net, [&](const Mlp& n) { return loss_and_grad_supervised(n, data, W); }, cfg);
}

inline TrainResult train_residual(Mlp& net, const ResidualProblem& pb, const TrainConfig& cfg,
                                  const std::vector<double>* W = nullptr) {
    return train_with(net, [&](const Mlp& n) { return loss_and_grad_residual(n, pb, W); }, cfg);
}

}  // namespace beacons
