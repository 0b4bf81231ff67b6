#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature (QUADPACK QAG scheme).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "maternfi/errors.hpp"

namespace maternfi::quadrature {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Interval& other) const { return error < other.error; }
};

// One application of the 7/15-point pair on [a, b], with QUADPACK's error heuristic.
template <class F>
Interval kronrod15(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::fabs(half);

  std::array<double, 7> lo{};
  std::array<double, 7> hi{};
  const double fc = f(center);
  double gauss = fc * kGaussWeights[3];
  double kronrod = fc * kKronrodWeights[7];
  double abs_sum = std::fabs(kronrod);

  for (int j = 0; j < 3; ++j) {
    const int k = 2 * j + 1;
    const double dx = half * kKronrodNodes[k];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    lo[k] = f1;
    hi[k] = f2;
    gauss += kGaussWeights[j] * (f1 + f2);
    kronrod += kKronrodWeights[k] * (f1 + f2);
    abs_sum += kKronrodWeights[k] * (std::fabs(f1) + std::fabs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int k = 2 * j;
    const double dx = half * kKronrodNodes[k];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    lo[k] = f1;
    hi[k] = f2;
    kronrod += kKronrodWeights[k] * (f1 + f2);
    abs_sum += kKronrodWeights[k] * (std::fabs(f1) + std::fabs(f2));
  }

  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::fabs(fc - mean);
  for (int k = 0; k < 7; ++k) {
    asc += kKronrodWeights[k] * (std::fabs(lo[k] - mean) + std::fabs(hi[k] - mean));
  }

  const double value = kronrod * half;
  abs_sum *= abs_half;
  asc *= abs_half;
  double err = std::fabs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  if (abs_sum > uflow / (50.0 * eps)) {
    err = std::max(50.0 * eps * abs_sum, err);
  }
  return {a, b, value, err};
}

}  // namespace detail

// Integrates f over [a, b] until the summed error estimate is below
// max(abs_tol, rel_tol * |I|), bisecting the worst interval each step.
// Throws QuadratureError if max_intervals is reached first.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_intervals) {
  std::priority_queue<detail::Interval> heap;
  detail::Interval first = detail::kronrod15(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  int evaluations = 15;

  auto tolerance = [&] { return std::max(abs_tol, rel_tol * std::fabs(total)); };

  while (error > tolerance()) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      throw QuadratureError("adaptive quadrature: tolerance not met within subdivision limit",
                            total, error);
    }
    const detail::Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Interval left = detail::kronrod15(f, worst.a, mid);
    const detail::Interval right = detail::kronrod15(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to shed the drift accumulated by the incremental updates.
  double resum = 0.0;
  double err_sum = 0.0;
  const int intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    resum += heap.top().value;
    err_sum += heap.top().error;
    heap.pop();
  }
  return {resum, err_sum, intervals, evaluations};
}

}  // namespace maternfi::quadrature
