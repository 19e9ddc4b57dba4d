#pragma once

// Globally adaptive Gauss-Kronrod (10/21) quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "bpswall/errors.hpp"

namespace bpswall::quad {

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

// Abscissae and weights of the 21-point Kronrod rule and the embedded
// 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067118279, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Interval {
  double lo, hi, value, error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

template <typename F>
Interval kronrod21(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrates f over [lo, hi] (either orientation). Stops once the summed
/// error estimate is below max(abs_tol, rel_tol * |I|); throws PrecisionError
/// when the interval budget is exhausted first.
template <typename F>
Result integrate(F&& f, double lo, double hi, const Options& opts = {}) {
  if (lo == hi) return {};
  const double sign = hi > lo ? 1.0 : -1.0;
  if (sign < 0) std::swap(lo, hi);

  std::priority_queue<detail::Interval> heap;
  auto first = detail::kronrod21(f, lo, hi);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  std::size_t count = 1;

  auto converged = [&] {
    return total_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };
  while (!converged()) {
    if (count >= opts.max_intervals) {
      throw PrecisionError("quadrature on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                           "] stalled at error " + std::to_string(total_err));
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw PrecisionError("quadrature interval collapsed near " + std::to_string(mid));
    }
    auto left = detail::kronrod21(f, worst.lo, mid);
    auto right = detail::kronrod21(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the running updates.
  double resum = 0.0, err = 0.0;
  while (!heap.empty()) {
    resum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sign * resum, err, count};
}

}  // namespace bpswall::quad
