#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ritzhom/common.hpp"
#include "ritzhom/network.hpp"

namespace ritzhom {

struct TrainConfig {
    long epochs = 30000;
    double lr0 = 0.005;
    double decay_factor = 0.95;
    long decay_every = 500;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
        if (lr0 <= 0.0) throw std::invalid_argument("lr0 must be > 0");
        if (decay_factor <= 0.0 || decay_factor > 1.0)
            throw std::invalid_argument("decay_factor must be in (0, 1]");
        if (decay_every < 1) throw std::invalid_argument("decay_every must be >= 1");
    }
};

// lr0 * factor^floor(epoch / every); the first decay applies at `every`.
inline double lr_at(const TrainConfig& cfg, long epoch) {
    return cfg.lr0 * std::pow(cfg.decay_factor, static_cast<double>(epoch / cfg.decay_every));
}

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(std::size_t n, double b1 = 0.9, double b2 = 0.999, double e = 1e-8)
        : m(n, 0.0), v(n, 0.0), beta1(b1), beta2(b2), eps(e) {}
};

// Standard Adam update with bias correction.
inline void adam_step(AdamState& st, std::span<double> params, std::span<const double> grads,
                      double lr) {
    if (params.size() != st.m.size() || grads.size() != st.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    st.step += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

struct TrainRecord {
    std::vector<double> loss_history;  // loss at the start of each epoch
    std::vector<double> final_params;
    double wall_seconds = 0.0;
    long epochs_run = 0;
};

class TrainingDiverged : public std::runtime_error {
  public:
    TrainingDiverged(long epoch, std::vector<double> last_params)
        : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch)),
          epoch(epoch),
          last_finite_params(std::move(last_params)) {}
    long epoch;
    std::vector<double> last_finite_params;
};

// Full-batch Adam loop. The objective must provide
//   begin_epoch(long), value_and_grad(span<const double>, span<double>).
// Deterministic for fixed (net params, objective seeds, config).
template <class Objective>
TrainRecord train(ResidualNet& net, Objective& objective, const TrainConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    TrainRecord rec;
    rec.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    AdamState adam(net.params.size(), cfg.beta1, cfg.beta2, cfg.eps);
    std::vector<double> grad(net.params.size(), 0.0);
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        objective.begin_epoch(epoch);
        const double loss = objective.value_and_grad(net.params, grad);
        if (!std::isfinite(loss)) throw TrainingDiverged(epoch, net.params);
        rec.loss_history.push_back(loss);
        adam_step(adam, net.params, grad, lr_at(cfg, epoch));
        rec.epochs_run = epoch + 1;
    }
    rec.final_params = net.params;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace ritzhom
