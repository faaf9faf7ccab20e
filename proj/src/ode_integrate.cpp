// Dormand-Prince 5(4) with the Hairer-Wanner continuous extension.

#include <algorithm>
#include <cmath>

#include "softsweep/ode.hpp"

namespace softsweep {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

Vec2 axpy(const Vec2& y, double h, std::initializer_list<std::pair<double, const Vec2*>> terms) {
  Vec2 out = y;
  for (const auto& [coef, k] : terms) {
    out[0] += h * coef * (*k)[0];
    out[1] += h * coef * (*k)[1];
  }
  return out;
}

double scaled_norm(const Vec2& v, const Vec2& y0, const Vec2& y1, double atol, double rtol) {
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    sum += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(sum / 2.0);
}

}  // namespace

const Solution::Step& Solution::locate(double t) const {
  if (steps_.empty()) throw std::out_of_range("Solution: empty solution");
  if (t < t_begin() - 1e-12 * (1.0 + std::abs(t)) || t > t_end() + 1e-12 * (1.0 + std::abs(t))) {
    throw std::out_of_range("Solution: time outside the integrated interval");
  }
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double value, const Step& s) { return value < s.t0; });
  if (it != steps_.begin()) --it;
  return *it;
}

Vec2 Solution::operator()(double t) const {
  if (steps_.empty()) return y_begin_;
  const Step& s = locate(t);
  const double th = (t - s.t0) / s.h;
  const double th1 = 1.0 - th;
  Vec2 out{};
  for (int i = 0; i < 2; ++i) {
    out[i] = s.coeff[0][i] +
             th * (s.coeff[1][i] + th1 * (s.coeff[2][i] + th * (s.coeff[3][i] + th1 * s.coeff[4][i])));
  }
  return out;
}

Vec2 Solution::derivative(double t) const {
  if (steps_.empty()) return {0.0, 0.0};
  const Step& s = locate(t);
  const double th = (t - s.t0) / s.h;
  Vec2 out{};
  for (int i = 0; i < 2; ++i) {
    const double dtheta = s.coeff[1][i] + (1.0 - 2.0 * th) * s.coeff[2][i] +
                          th * (2.0 - 3.0 * th) * s.coeff[3][i] +
                          2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * s.coeff[4][i];
    out[i] = dtheta / s.h;
  }
  return out;
}

Solution integrate(const Rhs& rhs, const Vec2& n0, double t_end, const IntegratorOptions& options) {
  if (n0[0] < 0.0 || n0[1] < 0.0) throw std::invalid_argument("integrate: initial state must be nonnegative");
  if (!(options.rtol > 0.0) || !(options.atol > 0.0)) throw std::invalid_argument("integrate: tolerances must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be nonnegative");

  Solution sol;
  sol.t_begin_ = 0.0;
  sol.y_begin_ = n0;
  if (t_end == 0.0) return sol;

  double t = 0.0;
  Vec2 y = n0;
  Vec2 k1 = rhs(y);

  double h = options.h_initial;
  if (h <= 0.0) {
    const double dy = scaled_norm(y, y, y, options.atol, options.rtol);
    const double df = scaled_norm(k1, y, y, options.atol, options.rtol);
    h = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
  }
  const double h_max = options.h_max > 0.0 ? options.h_max : t_end;
  h = std::min(h, h_max);

  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > options.max_steps) throw IntegrationError("integrate: step limit exceeded", t, y);
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }
    if (h < options.h_min) throw IntegrationError("integrate: step size underflow", t, y);

    const Vec2 k2 = rhs(axpy(y, h, {{a21, &k1}}));
    const Vec2 k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec2 k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec2 k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec2 k6 = rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec2 y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const Vec2 k7 = rhs(y1);

    Vec2 err{};
    for (int i = 0; i < 2; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    const double err_norm = scaled_norm(err, y, y1, options.atol, options.rtol);
    const bool negative = options.reject_negative && (y1[0] < 0.0 || y1[1] < 0.0);

    if (negative) {
      ++sol.rejected_;
      h *= 0.5;
      continue;
    }
    if (!(err_norm <= 1.0)) {
      ++sol.rejected_;
      const double fac = std::isfinite(err_norm) ? std::max(0.2, 0.9 * std::pow(err_norm, -0.2)) : 0.2;
      h *= fac;
      continue;
    }

    Solution::Step s;
    s.t0 = t;
    s.h = h;
    for (int i = 0; i < 2; ++i) {
      const double dy = y1[i] - y[i];
      const double bspl = h * k1[i] - dy;
      s.coeff[0][i] = y[i];
      s.coeff[1][i] = dy;
      s.coeff[2][i] = bspl;
      s.coeff[3][i] = dy - h * k7[i] - bspl;
      s.coeff[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    sol.steps_.push_back(s);

    t = last ? t_end : t + h;
    y = y1;
    k1 = k7;
    const double fac = err_norm > 0.0 ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 10.0) : 10.0;
    h = std::min(h * fac, h_max);
  }
  return sol;
}

Trajectory integrate(const Rhs& rhs, const Vec2& n0, const std::vector<double>& sample_times,
                     const IntegratorOptions& options) {
  Trajectory out;
  if (sample_times.empty()) return out;
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) || sample_times.front() < 0.0) {
    throw std::invalid_argument("integrate: sample times must be nonnegative and ascending");
  }
  const Solution sol = integrate(rhs, n0, sample_times.back(), options);
  out.t = sample_times;
  out.n.reserve(sample_times.size());
  for (const double t : sample_times) out.n.push_back(sol(t));
  return out;
}

}  // namespace softsweep
