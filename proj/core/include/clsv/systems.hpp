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


#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clsv/error.hpp"
#include "clsv/grid.hpp"
#include "clsv/stl.hpp"

namespace clsv {

/// Concurrent-learning MRAC constants. The plant is
///   x1' = x2,  x2' = theta1 x1 + theta2 x2 + u
/// tracking a second-order reference model driven by a piecewise-constant
/// command.
struct MracConstants {
  double natural_frequency = 1.0;
  double damping = 0.5;
  double adaptation_gain = 2.0;
  double concurrent_gain = 1.0;
  std::size_t history_capacity = 10;
  double history_min_separation = 0.1;
  /// Candidate history points are taken on this time lattice only.
  double history_interval = 0.5;
  /// (start time, level) pairs, sorted by time.
  std::vector<std::pair<double, double>> reference_steps{{0.0, 1.0}, {10.0, 1.5}, {20.0, -1.35}, {30.0, 0.0}};
};

/// Surrogate lateral-directional airframe with a heading-hold autopilot and
/// an altitude-hold pitch loop. Angles are in degrees at the interface,
/// altitude in feet.
struct AutopilotConstants {
  double airspeed = 147.6;         // ft/s
  double gravity = 32.174;         // ft/s^2
  double reference_heading = 112.0;
  double trim_alpha = 4.0;
  double nominal_iyy = 6930.0;     // kg m^2
  // Stability derivatives.
  double y_beta = -0.2;
  double l_beta = -4.0, l_p = -5.0, l_r = 1.0, l_aileron = 8.0;
  double n_beta = 2.0, n_p = -0.3, n_r = -1.0, n_rudder = -2.0;
  double lift_slope = 5.0;         // load factor per rad of alpha
  double m_alpha = -6.0, m_q = -3.0, m_elevator = 8.0;
  // Autopilot gains and limits.
  double heading_gain = 1.0;       // deg bank per deg heading error
  double bank_limit = 30.0;
  double roll_gain = 2.0, roll_rate_gain = 0.5;
  double yaw_damper_gain = 1.0;
  double altitude_gain = 0.01;     // deg pitch per ft
  double climb_rate_gain = 0.03;   // deg pitch per ft/s
  double pitch_command_limit = 10.0;
  double pitch_gain = 0.7, pitch_rate_gain = 0.6;
  double aileron_limit = 15.0, rudder_limit = 15.0, elevator_limit = 20.0;
};

struct SimConfig {
  double t_final = 40.0;
  double dt = 0.01;
  MracConstants mrac;
  AutopilotConstants autopilot;

  void validate() const;
  std::size_t step_count() const;
};

/// One closed-loop simulation instance. Created per run; may carry discrete
/// memory that is updated between integration steps (after_step).
class Plant {
 public:
  virtual ~Plant() = default;
  virtual std::vector<double> initial_state() const = 0;
  virtual void derivative(double t, std::span<const double> x, std::span<double> dx) const = 0;
  /// Called at the start of every integration step; piecewise-constant
  /// inputs are latched here so no RK4 stage straddles a switch.
  virtual void before_step(double /*t*/) {}
  virtual void after_step(double /*t*/, std::span<const double> /*x*/) {}
  virtual void outputs(double t, std::span<const double> x, std::span<double> y) const = 0;
};

struct SystemSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t param_dim = 0;
  Box box;
  std::vector<double> nominal_state;
  std::vector<std::string> channels;
  /// Preset formula name evaluated when no formula is configured.
  std::string default_formula;
  std::vector<std::size_t> default_grid;
  /// Largest robustness change expected between adjacent default-grid
  /// locations on the same side of the failure boundary; 0 when uncalibrated.
  double continuity_bound = 0.0;
  std::function<std::unique_ptr<Plant>(const ParamPoint&, const SimConfig&)> make_plant;
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Registered benchmarks: "mrac2d", "mrac3d", "autopilot".
std::vector<std::string> system_names();
SystemSpec make_system(std::string_view name);
SimConfig default_sim_config(std::string_view name);

/// Formula presets: "mrac_bound", "mrac_phi123", "mrac_phi123_corrected",
/// "altitude_hold".
std::vector<std::string> formula_preset_names();
std::string formula_preset(std::string_view name);

/// Fixed-step RK4 from the plant's initial state; outputs sampled every dt.
Trace simulate(const SystemSpec& spec, const ParamPoint& theta, const SimConfig& config);

RobustnessMeasurement measure(const SystemSpec& spec, const Formula& formula,
                              const ParamPoint& theta, const SimConfig& config);

}  // namespace clsv
