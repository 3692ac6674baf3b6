#pragma once

// Dormand-Prince 5(4) for autonomous systems on fixed-size states, with
// event location by bisection on the step length.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace psvf {

template <std::size_t N>
using State = std::array<double, N>;

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-13;
  double h_max = 0.1;
};

template <std::size_t N>
struct Dopri5 {
  using Rhs = std::function<State<N>(const State<N>&)>;

  /// One step of size h. When `err` is given it receives the embedded
  /// 5th-minus-4th order difference.
  static State<N> step(const Rhs& f, const State<N>& y, double h,
                       State<N>* err = nullptr) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                            b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                            e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                            e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    auto comb = [&](std::initializer_list<std::pair<double, const State<N>*>> terms) {
      State<N> out = y;
      for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (const auto& [c, k] : terms) s += c * (*k)[i];
        out[i] += h * s;
      }
      return out;
    };

    const State<N> k1 = f(y);
    const State<N> k2 = f(comb({{a21, &k1}}));
    const State<N> k3 = f(comb({{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = f(comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = f(comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 =
        f(comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> y5 =
        comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    if (err) {
      const State<N> k7 = f(y5);
      for (std::size_t i = 0; i < N; ++i) {
        (*err)[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                         e6 * k6[i] + e7 * k7[i]);
      }
    }
    return y5;
  }
};

enum class StopReason { Event, End, Observer, StepUnderflow };

template <std::size_t N>
struct IntegrationResult {
  State<N> y{};
  double s = 0.0;
  StopReason reason = StopReason::End;
  int event = -1;  // index of the event that fired
};

/// Integrates y' = f(y) from s = 0 to s_max. An event fires when its
/// function becomes >= 0 after an accepted step; the crossing is then
/// bisected on the step length to `event_tol`, re-taking the step from its
/// start each time, and the state at the upper end of the bracket is
/// returned. `observe(s, y)` runs after every accepted step (and at the
/// start); returning true stops the integration.
template <std::size_t N>
IntegrationResult<N> integrate(
    const typename Dopri5<N>::Rhs& f, State<N> y, double s_max,
    const StepControl& ctl,
    const std::vector<std::function<double(const State<N>&)>>& events,
    double event_tol,
    const std::function<bool(double, const State<N>&)>& observe) {
  IntegrationResult<N> out;
  double s = 0.0;
  double h = std::min(ctl.h_init, ctl.h_max);
  out.y = y;
  if (observe && observe(s, y)) {
    out.reason = StopReason::Observer;
    return out;
  }
  auto first_event = [&](const State<N>& z) {
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (events[k](z) >= 0.0) return static_cast<int>(k);
    }
    return -1;
  };
  while (s < s_max) {
    const bool last = h >= s_max - s;
    if (last) h = s_max - s;
    State<N> err{};
    const State<N> next = Dopri5<N>::step(f, y, h, &err);
    double e = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      if (!std::isfinite(next[i])) finite = false;
      const double sc = ctl.atol + ctl.rtol * std::max(std::fabs(y[i]), std::fabs(next[i]));
      e = std::max(e, std::fabs(err[i]) / sc);
    }
    if (!finite || e > 1.0) {
      const double factor = finite ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2;
      h *= factor;
      if (h < ctl.h_min) {
        out.y = y;
        out.s = s;
        out.reason = StopReason::StepUnderflow;
        return out;
      }
      continue;
    }
    const int fired = first_event(next);
    if (fired >= 0) {
      double lo = 0.0;
      double hi = h;
      State<N> at_hi = next;
      while (hi - lo > event_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const State<N> trial = Dopri5<N>::step(f, y, mid);
        if (first_event(trial) >= 0) {
          hi = mid;
          at_hi = trial;
        } else {
          lo = mid;
        }
      }
      out.y = at_hi;
      out.s = s + hi;
      out.reason = StopReason::Event;
      out.event = first_event(at_hi);
      return out;
    }
    s = last ? s_max : s + h;
    y = next;
    if (observe && observe(s, y)) {
      out.y = y;
      out.s = s;
      out.reason = StopReason::Observer;
      return out;
    }
    const double grow = e == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(e, -0.2));
    h = std::min(ctl.h_max, h * std::max(0.2, grow));
  }
  out.y = y;
  out.s = s;
  out.reason = StopReason::End;
  return out;
}

}  // namespace psvf
