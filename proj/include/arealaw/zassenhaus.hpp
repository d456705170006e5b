#pragma once

// Zassenhaus factorization
//     e^{X+Y} = e^X e^Y e^{-c2/2!} e^{-c3/3!} e^{-c4/4!} ...
// The factors act on the same space, so the products are ordinary operator
// products.

#include "arealaw/linalg.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

namespace arealaw::zassenhaus {

/// Closed-form commutator terms c2, c3, c4.
inline ComplexMatrix c_term_closed(const ComplexMatrix& x, const ComplexMatrix& y, int k) {
  const ComplexMatrix xy = commutator(x, y);
  switch (k) {
    case 2:
      return xy;
    case 3:
      return 2.0 * commutator(xy, y) + commutator(xy, x);
    case 4: {
      const ComplexMatrix xyy = commutator(xy, y);
      const ComplexMatrix xyx = commutator(xy, x);
      return 3.0 * commutator(xyy, y) + 3.0 * commutator(xyx, y) + commutator(xyx, x);
    }
    default:
      throw std::invalid_argument("c_term_closed: closed forms exist for k = 2, 3, 4 only");
  }
}

namespace detail {

/// Truncated power series in s with matrix coefficients.
using Series = std::vector<ComplexMatrix>;

inline Series exp_series(const ComplexMatrix& a, int max_order, int stride = 1) {
  const Index n = a.rows();
  Series s(max_order + 1, ComplexMatrix::Zero(n, n));
  ComplexMatrix term = identity(n);
  for (int m = 0; m * stride <= max_order; ++m) {
    if (m > 0) term = term * a / static_cast<double>(m);
    s[m * stride] = term;
  }
  return s;
}

inline Series multiply(const Series& a, const Series& b) {
  const int order = static_cast<int>(a.size()) - 1;
  const Index n = a.front().rows();
  Series out(order + 1, ComplexMatrix::Zero(n, n));
  for (int p = 0; p <= order; ++p)
    for (int q = 0; p + q <= order; ++q) out[p + q] += a[p] * b[q];
  return out;
}

}  // namespace detail

/// Terms c2..c_{max_order} generated iteratively. With
///   F_2(s) = e^{-sY} e^{-sX} e^{s(X+Y)} = e^{s^2 C_2} e^{s^3 C_3} ...
/// the lowest nontrivial coefficient of F_k is C_k, and
/// F_{k+1} = e^{-s^k C_k} F_k. The returned c_k = -k! C_k.
/// Element k of the result holds c_k (elements 0 and 1 are empty).
inline std::vector<ComplexMatrix> c_terms_iterative(const ComplexMatrix& x,
                                                    const ComplexMatrix& y, int max_order) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows()) {
    throw std::invalid_argument("c_terms_iterative: square matrices of equal size required");
  }
  if (max_order < 2) throw std::invalid_argument("c_terms_iterative: max_order must be >= 2");
  using detail::exp_series;
  using detail::multiply;
  detail::Series f = multiply(multiply(exp_series(-y, max_order), exp_series(-x, max_order)),
                              exp_series(x + y, max_order));
  std::vector<ComplexMatrix> c(max_order + 1);
  double k_factorial = 1.0;
  for (int k = 2; k <= max_order; ++k) {
    k_factorial *= k;
    const ComplexMatrix ck_series = f[k];
    c[k] = -k_factorial * ck_series;
    f = multiply(exp_series(-ck_series, max_order, k), f);
  }
  return c;
}

/// c_k(X, Y): closed forms for k <= 4, iterative generation above.
inline ComplexMatrix c_terms(const ComplexMatrix& x, const ComplexMatrix& y, int k) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows()) {
    throw std::invalid_argument("c_terms: square matrices of equal size required");
  }
  if (k < 2) throw std::invalid_argument("c_terms: k must be >= 2");
  if (k <= 4) return c_term_closed(x, y, k);
  return c_terms_iterative(x, y, k)[k];
}

struct Expansion {
  int order = 1;
  std::vector<ComplexMatrix> terms;  // terms[k] = c_k for 2 <= k <= order
  ComplexMatrix product;
};

/// e^X e^Y prod_{k=2}^{order} e^{-c_k/k!}. order = 1 is the plain split e^X e^Y.
inline Expansion truncated_expansion(const ComplexMatrix& x, const ComplexMatrix& y,
                                     int order) {
  if (order < 1) throw std::invalid_argument("truncated_exponential: order must be >= 1");
  Expansion e;
  e.order = order;
  e.terms.resize(std::max(order, 1) + 1);
  if (order >= 2) {
    const int closed_up_to = std::min(order, 4);
    for (int k = 2; k <= closed_up_to; ++k) e.terms[k] = c_term_closed(x, y, k);
    if (order > 4) {
      const std::vector<ComplexMatrix> it = c_terms_iterative(x, y, order);
      for (int k = 5; k <= order; ++k) e.terms[k] = it[k];
    }
  }
  e.product = expm(x) * expm(y);
  double k_factorial = 1.0;
  for (int k = 2; k <= order; ++k) {
    k_factorial *= k;
    e.product = e.product * expm(-e.terms[k] / k_factorial);
  }
  return e;
}

inline ComplexMatrix truncated_exponential(const ComplexMatrix& x, const ComplexMatrix& y,
                                           int order) {
  return truncated_expansion(x, y, order).product;
}

struct OrderScan {
  std::vector<double> times;   // all requested t values
  std::vector<double> errors;  // ||truncated - exp(X+Y)|| per t
  std::vector<double> used_times;
  double slope = 0.0;          // least-squares d log(err) / d log(t)
  bool degenerate = false;     // fewer than 3 errors above the floor
};

inline constexpr double kErrorFloor = 1e-14;

/// Fits log ||error|| against log t. Errors below 1e-14 are dropped; fewer
/// than three remaining points marks the scan degenerate (e.g. commuting
/// generators, where every error sits at the machine floor).
inline OrderScan truncation_order_scan(const std::function<ComplexMatrix(double)>& x_of_t,
                                       const std::function<ComplexMatrix(double)>& y_of_t,
                                       int order, const std::vector<double>& t_values) {
  if (t_values.size() < 4) {
    throw std::invalid_argument("truncation_order_scan: at least 4 t values required");
  }
  OrderScan scan;
  scan.times = t_values;
  std::vector<double> lx, ly;
  for (double t : t_values) {
    if (!(t > 0.0)) throw std::invalid_argument("truncation_order_scan: t values must be > 0");
    const ComplexMatrix x = x_of_t(t), y = y_of_t(t);
    const double err = operator_norm(truncated_exponential(x, y, order) - expm(x + y));
    scan.errors.push_back(err);
    if (err >= kErrorFloor) {
      scan.used_times.push_back(t);
      lx.push_back(std::log(t));
      ly.push_back(std::log(err));
    }
  }
  if (lx.size() < 3) {
    scan.degenerate = true;
    return scan;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  scan.slope = sxy / sxx;
  return scan;
}

/// Linear generators X = t A, Y = t B.
inline OrderScan truncation_order_scan(const ComplexMatrix& a, const ComplexMatrix& b,
                                       int order, const std::vector<double>& t_values) {
  return truncation_order_scan([&a](double t) { return ComplexMatrix(t * a); },
                               [&b](double t) { return ComplexMatrix(t * b); }, order, t_values);
}

/// n points log-spaced on [lo, hi].
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw std::invalid_argument("log_spaced: bad range");
  std::vector<double> v(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return v;
}

}  // namespace arealaw::zassenhaus
