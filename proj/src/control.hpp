#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "rbfn.hpp"
#include "sim.hpp"

namespace dlo {

// Moore-Penrose pseudo-inverse with hard truncation: singular values at or
// below `sigma_trunc` are dropped, so |pinv(J) v| <= |v| / sigma_trunc.
// `rank_out`, if given, receives the number of retained singular values.
Eigen::MatrixXd truncated_pinv(const Eigen::MatrixXd& J, double sigma_trunc,
                               int* rank_out = nullptr);

// Desired target trajectory: fills y_d and yd_dot for time t.
using TargetFn =
    std::function<void(double t, Eigen::VectorXd& y_d, Eigen::VectorXd& yd_dot)>;

TargetFn fixed_target(const Eigen::VectorXd& y_d);

struct LoopConfig {
  std::vector<int> target_features;  // 0-based feature indices to servo
  double duration_s = 60.0;
  double control_hz = 50.0;
  double kp = 0.2;           // K_p = kp * I
  double lambda = 10.0;
  double gain_L = 20.0;      // adaptation gain, L = gain_L * I
  double sigma_trunc = 1e-3;
  double u_max = 0.12;       // m/s, command norm clamp
  Eigen::Vector3d u_mask{1.0, 1.0, 1.0};  // zero entries disable action axes
  bool adapt = true;
  int vel_window = 5;        // ticks spanned by the velocity estimate
  double reach_tol = 5e-3;   // m, |dy| threshold counting as reached
  double reach_hold_s = 1.0; // |dy| must stay below tol this long
  bool stop_on_reach = false;
  double diverge_dy = 0.75;  // m, |dy| above this aborts the run
  double eq16_tol = 0.0;     // >0 asserts the error-dynamics identity on
                             // full-rank, unclamped, unmasked ticks

  void validate(const SimConfig& sim) const;
};

struct LoopTick {
  double t = 0.0;
  double dy = 0.0;      // |y - y_d|
  Eigen::Vector3d u{0.0, 0.0, 0.0};  // executed command
  double u_norm = 0.0;
  int rank = 0;         // singular values kept by the truncation
  double v_task = 0.0;  // 0.5 |dy|^2
  double ew = 0.0;      // |ydot_meas - Jhat*u_bar|, NaN until history fills
  double eq16 = 0.0;    // |e_w - (dydot + Kp dy)|, NaN until history fills
  bool clamped = false; // u hit the norm clamp this tick
};

// Per-tick diagnostics CSV column set.
inline constexpr const char* kTickCsvHeader =
    "t,dy_norm,ew_norm,u_0,u_1,u_2,rank,V_task";

struct LoopResult {
  std::vector<LoopTick> ticks;
  bool reached = false;
  double time_to_reach = std::numeric_limits<double>::infinity();
  double final_err = 0.0;
};

// Servo loop on the simulator: u = pinv(Jhat) (yd_dot - Kp dy) at the control
// rate, zero-order hold between ticks. With `adapt` on, the weight rows of the
// target features are integrated with
//   dw_ij/dt = L u_i (dy_j + lambda ew_j) theta(phi)
// where ew = ydot_meas - Jhat u_bar, ydot_meas the backward difference over
// `vel_window` ticks and u_bar the mean command over that window. Masked
// action axes are removed from Jhat before inversion. The target counts as
// reached at the start of the first window of `reach_hold_s` seconds spent
// entirely below reach_tol. |dy| > diverge_dy aborts with a run_aborted error.
// The network is modified in place; pass a copy to keep the offline model.
LoopResult run_closed_loop(RodSimulator& sim, RbfNetwork& net,
                           const TargetFn& target, const LoopConfig& cfg);

}  // namespace dlo
