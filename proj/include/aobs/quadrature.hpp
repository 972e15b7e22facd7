#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "aobs/error.hpp"

namespace aobs {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
};

namespace detail {

// G7/K15 abscissae and weights on [-1,1] (QUADPACK table).
inline constexpr double kKronrodX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussW[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Interval {
  double a, b, value, err;
};

template <class F>
Interval eval_gk(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  // index 7 is the center; pairs (7-i, 7+i) share |x|
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodX[i];
    fv[i] = f(c - dx);
    fv[14 - i] = f(c + dx);
  }
  fv[7] = f(c);
  double kron = kKronrodW[7] * fv[7];
  for (int i = 0; i < 7; ++i) kron += kKronrodW[i] * (fv[i] + fv[14 - i]);
  // Gauss-7 uses the odd Kronrod nodes (indices 1,3,5,7 from the center out)
  double gauss = kGaussW[3] * fv[7];
  gauss += kGaussW[2] * (fv[5] + fv[9]);
  gauss += kGaussW[1] * (fv[3] + fv[11]);
  gauss += kGaussW[0] * (fv[1] + fv[13]);
  Interval out;
  out.a = a;
  out.b = b;
  out.value = kron * h;
  const double diff = (kron - gauss) * h;
  out.err = std::pow(200.0 * std::fabs(diff), 1.5);
  if (!std::isfinite(out.err) || out.err > std::fabs(diff)) out.err = std::fabs(diff);
  return out;
}

}  // namespace detail

// Adaptive Gauss-Kronrod on [a,b]. Splits the interval with the largest local
// error until abs/rel targets hold or the subdivision cap is hit.
template <class F>
QuadResult integrate(F f, double a, double b, double rel_tol = 1e-9, double abs_tol = 1e-12,
                     std::size_t max_subdiv = 2000) {
  QuadResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  std::vector<detail::Interval> segs;
  segs.push_back(detail::eval_gk(f, a, b));
  for (std::size_t pass = 0; pass < max_subdiv; ++pass) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].value;
      err += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    res.value = total;
    res.abs_error = err;
    if (err <= abs_tol || err <= rel_tol * std::fabs(total)) {
      res.converged = true;
      return res;
    }
    const detail::Interval w = segs[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (!(mid > w.a && mid < w.b)) break;  // interval exhausted at double precision
    segs[worst] = detail::eval_gk(f, w.a, mid);
    segs.push_back(detail::eval_gk(f, mid, w.b));
  }
  res.converged = false;
  return res;
}

// Same, but throws QuadratureFailure instead of returning a flag.
template <class F>
double integrate_or_throw(F f, double a, double b, double rel_tol = 1e-9,
                          double abs_tol = 1e-12) {
  const QuadResult r = integrate(f, a, b, rel_tol, abs_tol);
  if (!r.converged) fail(errc::quadrature_failure, "adaptive quadrature did not converge");
  return r.value;
}

}  // namespace aobs
