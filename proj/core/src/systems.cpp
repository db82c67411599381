/*
 * Copyright 2026 The clsv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "clsv/systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace clsv {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(t_final >= dt)) throw Error("sim config: need 0 < dt <= t_final");
  const double ratio = t_final / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw Error("sim config: t_final must be an integer multiple of dt");
}

std::size_t SimConfig::step_count() const {
  validate();
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Smooth symmetric limiter; keeps the right-hand side differentiable so the
// fixed-step integrator retains its order through saturation.
double saturate(double v, double limit) { return limit * std::tanh(v / limit); }

// ---------------------------------------------------------------------------
// Concurrent-learning MRAC
//
// State: [x1, x2, xm1, xm2, w1, w2], e = xm - x.
//   u   = -a x1 - b x2 + a r - w^T x
//   w'  = -G x (e^T P B) - Gc sum_j x_j (w^T x_j - theta^T x_j) / (1 + |x_j|^2)
// with a = wn^2, b = 2 zeta wn and P the solution of Am^T P + P Am = -I.

class MracPlant final : public Plant {
 public:
  MracPlant(const ParamPoint& theta, const MracConstants& c, bool initial_offset)
      : c_(c), th1_(theta[0]), th2_(theta[1]) {
    a_ = c.natural_frequency * c.natural_frequency;
    b_ = 2.0 * c.damping * c.natural_frequency;
    p12_ = 1.0 / (2.0 * a_);
    p22_ = (p12_ + 0.5) / b_;
    if (initial_offset) x1_offset_ = theta[2];
  }

  std::vector<double> initial_state() const override {
    return {x1_offset_, 0.0, 0.0, 0.0, 0.0, 0.0};
  }

  double reference(double t) const {
    double r = 0.0;
    for (const auto& [start, level] : c_.reference_steps) {
      if (t + 1e-12 >= start) r = level;
    }
    return r;
  }

  double control(double r, std::span<const double> x) const {
    return -a_ * x[0] - b_ * x[1] + a_ * r - (x[4] * x[0] + x[5] * x[1]);
  }

  void before_step(double t) override { held_reference_ = reference(t); }

  void derivative(double, std::span<const double> x, std::span<double> dx) const override {
    const double r = held_reference_;
    const double u = control(r, x);
    dx[0] = x[1];
    dx[1] = th1_ * x[0] + th2_ * x[1] + u;
    dx[2] = x[3];
    dx[3] = -a_ * x[2] - b_ * x[3] + a_ * r;

    const double e1 = x[2] - x[0];
    const double e2 = x[3] - x[1];
    const double epb = p12_ * e1 + p22_ * e2;
    double g1 = -c_.adaptation_gain * x[0] * epb;
    double g2 = -c_.adaptation_gain * x[1] * epb;
    for (const auto& h : history_) {
      const double err = ((x[4] - th1_) * h[0] + (x[5] - th2_) * h[1]) / (1.0 + h[0] * h[0] + h[1] * h[1]);
      g1 -= c_.concurrent_gain * h[0] * err;
      g2 -= c_.concurrent_gain * h[1] * err;
    }
    dx[4] = g1;
    dx[5] = g2;
  }

  // Every history_interval seconds, records (x1, x2) if it differs enough from
  // the last stored point; the oldest entry is overwritten when full.
  void after_step(double t, std::span<const double> x) override {
    if (c_.history_capacity == 0 || !(c_.history_interval > 0.0)) return;
    const double phase = t / c_.history_interval;
    if (std::abs(phase - std::round(phase)) > 1e-6) return;
    const std::array<double, 2> p{x[0], x[1]};
    if (!history_.empty()) {
      const auto& last = history_[last_];
      if (std::hypot(p[0] - last[0], p[1] - last[1]) < c_.history_min_separation) return;
    }
    if (history_.size() < c_.history_capacity) {
      history_.push_back(p);
      last_ = history_.size() - 1;
    } else {
      last_ = (last_ + 1) % history_.size();
      history_[last_] = p;
    }
  }

  void outputs(double t, std::span<const double> x, std::span<double> y) const override {
    y[0] = x[0];
    y[1] = x[1];
    y[2] = x[2];
    y[3] = x[3];
    y[4] = x[2] - x[0];
    y[5] = x[3] - x[1];
    y[6] = control(reference(t), x);
    y[7] = reference(t);
    y[8] = x[4];
    y[9] = x[5];
  }

 private:
  MracConstants c_;
  double th1_, th2_;
  double x1_offset_ = 0.0;
  double a_, b_, p12_, p22_;
  std::vector<std::array<double, 2>> history_;
  std::size_t last_ = 0;
  double held_reference_ = 0.0;
};

const std::vector<std::string> kMracChannels{"x1", "x2", "xm1", "xm2", "e1", "e2", "u", "r", "w1", "w2"};

// ---------------------------------------------------------------------------
// Surrogate heading-hold autopilot
//
// State: [beta, p, r, phi, psi, theta, q, gamma, h] (angles in rad, h in ft).
// Parameters: roll(0), pitch(0), heading(0) in degrees and Iyy in kg m^2.

class AutopilotPlant final : public Plant {
 public:
  AutopilotPlant(const ParamPoint& theta, const AutopilotConstants& c) : c_(c) {
    roll0_ = theta[0] * kDeg;
    pitch0_ = theta[1] * kDeg;
    heading0_ = theta[2] * kDeg;
    inertia_ratio_ = theta.size() > 3 ? c.nominal_iyy / theta[3] : 1.0;
  }

  std::vector<double> initial_state() const override {
    return {0.0, 0.0, 0.0, roll0_, heading0_, pitch0_, 0.0, 0.0, 0.0};
  }

  struct Surfaces {
    double aileron, rudder, elevator, load_factor;
  };

  Surfaces surfaces(std::span<const double> x) const {
    const double beta = x[0], p = x[1], r = x[2], phi = x[3], psi = x[4];
    const double th = x[5], q = x[6], gam = x[7], h = x[8];
    (void)beta;

    double heading_err = c_.reference_heading * kDeg - psi;
    heading_err = std::remainder(heading_err, 2.0 * std::numbers::pi);
    const double bank_lim = c_.bank_limit * kDeg;
    const double phi_cmd = saturate(c_.heading_gain * heading_err, bank_lim);
    const double ail_lim = c_.aileron_limit * kDeg;
    const double aileron = saturate(c_.roll_gain * (phi_cmd - phi) - c_.roll_rate_gain * p, ail_lim);
    const double rud_lim = c_.rudder_limit * kDeg;
    const double rudder = saturate(c_.yaw_damper_gain * r, rud_lim);

    const double climb = c_.airspeed * std::sin(gam);
    const double pitch_lim = c_.pitch_command_limit * kDeg;
    const double theta_cmd =
        c_.trim_alpha * kDeg +
        saturate((-c_.altitude_gain * h - c_.climb_rate_gain * climb) * kDeg, pitch_lim);
    const double elev_lim = c_.elevator_limit * kDeg;
    const double elevator = saturate(c_.pitch_gain * (theta_cmd - th) - c_.pitch_rate_gain * q, elev_lim);

    const double alpha = th - gam;
    const double nz = 1.0 + c_.lift_slope * (alpha - c_.trim_alpha * kDeg);
    return {aileron, rudder, elevator, nz};
  }

  void derivative(double, std::span<const double> x, std::span<double> dx) const override {
    const double beta = x[0], p = x[1], r = x[2], phi = x[3];
    const double th = x[5], q = x[6], gam = x[7];
    const Surfaces s = surfaces(x);
    const double gv = c_.gravity / c_.airspeed;
    const double alpha = th - gam;

    dx[0] = c_.y_beta * beta + gv * std::cos(th) * std::sin(phi) - r;
    dx[1] = c_.l_beta * beta + c_.l_p * p + c_.l_r * r + c_.l_aileron * s.aileron;
    dx[2] = c_.n_beta * beta + c_.n_p * p + c_.n_r * r + c_.n_rudder * s.rudder;
    dx[3] = p + (q * std::sin(phi) + r * std::cos(phi)) * std::tan(th);
    dx[4] = (q * std::sin(phi) + r * std::cos(phi)) / std::cos(th);
    dx[5] = q * std::cos(phi) - r * std::sin(phi);
    dx[6] = inertia_ratio_ *
            (c_.m_alpha * (alpha - c_.trim_alpha * kDeg) + c_.m_q * q + c_.m_elevator * s.elevator);
    dx[7] = gv * (s.load_factor * std::cos(phi) - std::cos(gam));
    dx[8] = c_.airspeed * std::sin(gam);
  }

  void outputs(double, std::span<const double> x, std::span<double> y) const override {
    const Surfaces s = surfaces(x);
    y[0] = x[8];
    y[1] = x[3] / kDeg;
    y[2] = x[4] / kDeg;
    y[3] = x[5] / kDeg;
    y[4] = x[0] / kDeg;
    y[5] = x[7] / kDeg;
    y[6] = s.load_factor;
    y[7] = s.aileron / kDeg;
    y[8] = s.rudder / kDeg;
    y[9] = s.elevator / kDeg;
  }

 private:
  AutopilotConstants c_;
  double roll0_, pitch0_, heading0_;
  double inertia_ratio_ = 1.0;
};

const std::vector<std::string> kAutopilotChannels{"x", "roll", "heading", "pitch", "sideslip",
                                                  "flight_path", "nz", "aileron", "rudder", "elevator"};

}  // namespace

std::vector<std::string> system_names() { return {"mrac2d", "mrac3d", "autopilot"}; }

SystemSpec make_system(std::string_view name) {
  SystemSpec s;
  s.name = std::string(name);
  if (name == "mrac2d" || name == "mrac3d") {
    const bool three = name == "mrac3d";
    s.state_dim = 6;
    s.param_dim = three ? 3 : 2;
    s.box = three ? Box{{-5.0, -5.0, -1.0}, {5.0, 5.0, 1.0}} : Box{{-10.0, -10.0}, {10.0, 10.0}};
    s.nominal_state.assign(6, 0.0);
    s.channels = kMracChannels;
    s.default_formula = three ? "mrac_phi123" : "mrac_bound";
    s.default_grid = three ? std::vector<std::size_t>{21, 21, 11} : std::vector<std::size_t>{41, 41};
    // Calibrated from full default-grid sweeps (observed maxima 0.37 and 0.97).
    s.continuity_bound = three ? 1.25 : 0.5;
    s.make_plant = [three](const ParamPoint& theta, const SimConfig& cfg) -> std::unique_ptr<Plant> {
      return std::make_unique<MracPlant>(theta, cfg.mrac, three);
    };
    return s;
  }
  if (name == "autopilot") {
    s.state_dim = 9;
    s.param_dim = 4;
    s.box = Box{{-60.0, 4.0, 75.0, 5430.0}, {60.0, 19.0, 145.0, 8430.0}};
    s.nominal_state.assign(9, 0.0);
    s.channels = kAutopilotChannels;
    s.default_formula = "altitude_hold";
    s.default_grid = {9, 9, 9, 5};
    s.make_plant = [](const ParamPoint& theta, const SimConfig& cfg) -> std::unique_ptr<Plant> {
      return std::make_unique<AutopilotPlant>(theta, cfg.autopilot);
    };
    return s;
  }
  throw Error("unknown benchmark '" + std::string(name) + "'");
}

SimConfig default_sim_config(std::string_view name) {
  SimConfig cfg;
  if (name == "autopilot") cfg.t_final = 50.0;
  return cfg;
}

std::vector<std::string> formula_preset_names() {
  return {"mrac_bound", "mrac_phi123", "mrac_phi123_corrected", "altitude_hold"};
}

std::string formula_preset(std::string_view name) {
  if (name == "mrac_bound") return "G[0,40](1 - abs(e1) >= 0)";
  const std::string phi1 = "(F[2,3](x1 - 0.7 >= 0) and F[2,3](1.3 - x1 >= 0))";
  const std::string phi3 = "(G[22.4,22.6](x1 + 1.6 >= 0) and G[22.4,22.6](-1.2 - x1 >= 0))";
  if (name == "mrac_phi123")
    return phi1 + " and (F[12,13](x1 - 1.1 >= 0) and F[2,3](1.7 - x1 >= 0)) and " + phi3;
  if (name == "mrac_phi123_corrected")
    return phi1 + " and (F[12,13](x1 - 1.1 >= 0) and F[12,13](1.7 - x1 >= 0)) and " + phi3;
  if (name == "altitude_hold") return "G[0,50](35 - abs(x) >= 0)";
  throw Error("unknown formula preset '" + std::string(name) + "'");
}

Trace simulate(const SystemSpec& spec, const ParamPoint& theta, const SimConfig& config) {
  const std::size_t steps = config.step_count();
  if (static_cast<std::size_t>(theta.size()) != spec.param_dim)
    throw DimensionError("simulate: parameter dimension mismatch for " + spec.name);
  if (!spec.box.contains(theta, 1e-9))
    throw Error("simulate: parameter point outside the box of " + spec.name);

  auto plant = spec.make_plant(theta, config);
  std::vector<double> x = plant->initial_state();
  const std::size_t n = x.size();
  const std::size_t m = spec.channels.size();

  std::vector<double> times(steps + 1);
  std::vector<std::vector<double>> channels(m, std::vector<double>(steps + 1));
  std::vector<double> y(m);
  auto record = [&](std::size_t k) {
    plant->outputs(times[k], x, y);
    for (std::size_t c = 0; c < m; ++c) channels[c][k] = y[c];
  };
  times[0] = 0.0;
  record(0);

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double h = config.dt;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    plant->before_step(t);
    plant->derivative(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    plant->derivative(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    plant->derivative(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    plant->derivative(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    times[k + 1] = static_cast<double>(k + 1) * h;
    for (double v : x) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "simulate: non-finite state at t = " << times[k + 1] << " s (" << spec.name << ")";
        throw SimulationError(msg.str(), times[k + 1]);
      }
    }
    plant->after_step(times[k + 1], x);
    record(k + 1);
  }
  return Trace(std::move(times), spec.channels, std::move(channels));
}

RobustnessMeasurement measure(const SystemSpec& spec, const Formula& formula, const ParamPoint& theta,
                              const SimConfig& config) {
  return robustness(formula, simulate(spec, theta, config));
}

}  // namespace clsv
