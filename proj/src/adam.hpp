#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace dlo {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::ArrayXXd m;
  Eigen::ArrayXXd v;

  static AdamState zeros(Eigen::Index rows, Eigen::Index cols) {
    return {Eigen::ArrayXXd::Zero(rows, cols), Eigen::ArrayXXd::Zero(rows, cols)};
  }
};

// One Adam update with bias correction. `t` is the shared step counter,
// already incremented for this step (t >= 1).
inline void adam_step(Eigen::Ref<Eigen::ArrayXXd> params,
                      const Eigen::Ref<const Eigen::ArrayXXd>& grads,
                      AdamState& state, long t, const AdamConfig& cfg) {
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.square();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  params -= cfg.alpha * (state.m / c1) / ((state.v / c2).sqrt() + cfg.eps);
}

// Convenience wrapper updating several tensors under one step counter.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const AdamConfig& cfg) : cfg_(cfg) {}

  int add_param(Eigen::Index rows, Eigen::Index cols) {
    states_.push_back(AdamState::zeros(rows, cols));
    return static_cast<int>(states_.size()) - 1;
  }

  void begin_step() { ++t_; }

  void update(int slot, Eigen::Ref<Eigen::ArrayXXd> params,
              const Eigen::Ref<const Eigen::ArrayXXd>& grads) {
    adam_step(params, grads, states_[slot], t_, cfg_);
  }

  long step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<AdamState> states_;
  long t_ = 0;
};

}  // namespace dlo
