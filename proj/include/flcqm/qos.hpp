#pragma once

// Per-source closed loop: measure the deadline miss ratio once per
// invocation interval, feed error and error change to the fuzzy controller,
// clamp the resulting sampling period.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "flcqm/fuzzy.hpp"

namespace flcqm {

class InvalidPeriodError : public std::invalid_argument {
 public:
  explicit InvalidPeriodError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

class InvalidConfigError : public std::invalid_argument {
 public:
  explicit InvalidConfigError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

struct DmrSample {
  std::int64_t interval_index = 0;
  std::int64_t misses = 0;
  std::int64_t expected = 1;  // floor(t_flc / h)
  double dmr = 0.0;           // min(1, misses / expected)
};

// floor rounds toward minus infinity; quotients within 1e-9 of an integer
// are snapped first so 1 s / 10 ms is exactly 100.
inline std::int64_t expected_samples(double t_flc, double h) {
  const double q = t_flc / h;
  const double r = std::round(q);
  if (std::abs(q - r) < 1e-9) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(q));
}

inline DmrSample compute_dmr(std::int64_t misses, double t_flc, double h,
                             std::int64_t interval_index = 0) {
  if (!(h > 0.0)) throw InvalidPeriodError("compute_dmr: h must be > 0");
  if (!(t_flc >= 2.0 * h))
    throw InvalidPeriodError("compute_dmr: t_flc must be >= 2h");
  if (misses < 0) throw InvalidPeriodError("compute_dmr: misses must be >= 0");
  DmrSample s;
  s.interval_index = interval_index;
  s.misses = misses;
  s.expected = expected_samples(t_flc, h);
  s.dmr = std::min(1.0, static_cast<double>(misses) /
                            static_cast<double>(s.expected));
  return s;
}

struct QosConfig {
  double h_initial = 0.010;   // s
  double h_min = 0.002;       // s
  double h_max = 0.100;       // s
  double dmr_setpoint = 0.10;
  double t_flc = 1.0;         // s
};

struct QosManagerState {
  int source_id = 0;
  double h = 0.010;
  double h_min = 0.002;
  double h_max = 0.100;
  double dmr_setpoint = 0.10;
  double t_flc = 1.0;
  double prev_error = 0.0;
  std::int64_t interval_index = 0;
};

inline QosManagerState initial_state(const QosConfig& cfg, int source_id = 0) {
  if (!(cfg.h_min > 0.0))
    throw InvalidConfigError("qos: h_min must be > 0");
  if (!(cfg.h_min <= cfg.h_initial && cfg.h_initial <= cfg.h_max))
    throw InvalidConfigError("qos: need h_min <= h <= h_max");
  if (!(cfg.h_max <= cfg.t_flc / 2.0))
    throw InvalidConfigError("qos: need h_max <= t_flc / 2");
  if (!(cfg.dmr_setpoint >= 0.0 && cfg.dmr_setpoint <= 1.0))
    throw InvalidConfigError("qos: setpoint must be in [0, 1]");
  QosManagerState st;
  st.source_id = source_id;
  st.h = cfg.h_initial;
  st.h_min = cfg.h_min;
  st.h_max = cfg.h_max;
  st.dmr_setpoint = cfg.dmr_setpoint;
  st.t_flc = cfg.t_flc;
  st.prev_error = 0.0;
  st.interval_index = 0;
  return st;
}

struct QosStepDiag {
  double e = 0.0;
  double de = 0.0;
  double dh = 0.0;  // seconds
};

// Controller output is in milliseconds; periods are kept in seconds.
inline QosStepDiag on_interval_end(QosManagerState& state,
                                   const FuzzyController& controller,
                                   const DmrSample& sample) {
  if (sample.interval_index != state.interval_index)
    throw InvalidConfigError("qos: interval index mismatch");
  QosStepDiag d;
  d.e = state.dmr_setpoint - sample.dmr;
  d.de = d.e - state.prev_error;
  d.dh = controller.step(d.e, d.de) * 1e-3;
  state.prev_error = d.e;
  state.h = std::clamp(state.h + d.dh, state.h_min, state.h_max);
  state.interval_index += 1;
  return d;
}

}  // namespace flcqm
