#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pmoal/linalg.hpp"

namespace pmoal {

inline double mean_of(const Vec& v) {
  if (v.empty()) throw std::invalid_argument("mean_of: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 denominator); 0 for singleton samples.
inline double sample_std(const Vec& v) {
  if (v.empty()) throw std::invalid_argument("sample_std: empty sample");
  if (v.size() == 1) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace detail {

/// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  const double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 3e-15) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Student-t survival function P(T > t) with df degrees of freedom.
inline double student_t_sf(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("student_t_sf: df must be > 0");
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 0.5;  // one-sided: evidence that mean(reference) < mean(other)
};

/// One-sided Welch test of H1: mean(reference) < mean(other).
/// Small p means the reference sample is significantly lower.
inline WelchResult welch_one_sided(const Vec& reference, const Vec& other) {
  if (reference.size() < 2 || other.size() < 2)
    throw std::invalid_argument("welch_one_sided: need at least 2 samples per group");
  WelchResult out;
  const double mr = mean_of(reference), mo = mean_of(other);
  const double sr = sample_std(reference), so = sample_std(other);
  const double nr = static_cast<double>(reference.size());
  const double no = static_cast<double>(other.size());
  const double vr = sr * sr / nr, vo = so * so / no;
  const double se = std::sqrt(vr + vo);
  if (se == 0.0) {
    // degenerate zero-variance samples: decided by the means alone
    out.t = 0.0;
    out.df = nr + no - 2.0;
    out.p = mr < mo ? 0.0 : (mr > mo ? 1.0 : 0.5);
    return out;
  }
  out.t = (mr - mo) / se;
  out.df = (vr + vo) * (vr + vo) /
           (vr * vr / (nr - 1.0) + vo * vo / (no - 1.0));
  out.p = student_t_sf(-out.t, out.df);  // P(T <= t)
  return out;
}

/// Support-weighted F1 over integer class labels in [0, n_classes).
inline double weighted_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                          int n_classes) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("weighted_f1: prediction/truth size mismatch");
  std::vector<long long> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0),
      support(n_classes, 0);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const int p = pred[k], y = truth[k];
    if (p < 0 || p >= n_classes || y < 0 || y >= n_classes)
      throw std::invalid_argument("weighted_f1: label out of range");
    ++support[y];
    if (p == y) {
      ++tp[y];
    } else {
      ++fp[p];
      ++fn[y];
    }
  }
  double f1 = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    const double prec_den = static_cast<double>(tp[c] + fp[c]);
    const double rec_den = static_cast<double>(tp[c] + fn[c]);
    const double prec = prec_den > 0 ? tp[c] / prec_den : 0.0;
    const double rec = rec_den > 0 ? tp[c] / rec_den : 0.0;
    const double fc = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    f1 += fc * static_cast<double>(support[c]) / static_cast<double>(truth.size());
  }
  return f1;
}

}  // namespace pmoal
