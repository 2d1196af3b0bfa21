#pragma once

// Stability polynomial R(z) = 1 + sum_k (b A^{k-1} 1) z^k and certified
// axis intervals of the region |R(z)| <= 1.
//
// An interval endpoint is located on G(x) = |R|^2 - 1 restricted to an axis:
// G is an exact rational polynomial, its Bernstein coefficients over [0, U]
// are computed in integers and refined by de Casteljau bisection. A cell whose
// coefficients are all <= 0 certifies G <= 0 on the cell; the first leaf cell
// whose right endpoint has G > 0 brackets the boundary. Every sign decision is
// exact.

#include "rkx/numeric.hpp"
#include "rkx/tableau.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace rkx {

struct StabilityPolynomial {
  std::vector<Coefficient> coeffs;  ///< r_0..r_deg, trailing zeros trimmed
  bool exact = true;

  [[nodiscard]] std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

namespace detail {

template <class Scalar>
std::vector<Scalar> stability_coefficients(const Tableau& t) {
  const auto s = t.stages();
  std::vector<std::vector<std::pair<std::size_t, Scalar>>> rows(s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (!t.a(i, j).is_zero()) rows[i].emplace_back(j, ScalarTraits<Scalar>::from(t.a(i, j)));
  std::vector<Scalar> b;
  for (const auto& x : t.b()) b.push_back(ScalarTraits<Scalar>::from(x));

  std::vector<Scalar> r{Scalar(1)};
  std::vector<Scalar> v(s, Scalar(1));
  for (std::size_t k = 1; k <= s; ++k) {
    Scalar acc = 0;
    for (std::size_t i = 0; i < s; ++i) acc += b[i] * v[i];
    r.push_back(acc);
    std::vector<Scalar> next(s, Scalar(0));
    for (std::size_t i = 0; i < s; ++i)
      for (const auto& [j, a] : rows[i]) next[i] += a * v[j];
    v = std::move(next);
  }
  return r;
}

}  // namespace detail

/// Exact for exact tableaus. For inexact ones, coefficients of index <= p
/// within the order tolerance of 1/k! are snapped to 1/k! (the order
/// conditions for the tall trees force them), and negligible entries to 0.
inline StabilityPolynomial stability_polynomial(const Tableau& t, double tol = 1e-13) {
  StabilityPolynomial out;
  out.exact = t.is_exact();
  if (out.exact) {
    for (auto& r : detail::stability_coefficients<Rational>(t)) out.coeffs.emplace_back(std::move(r));
  } else {
    Rational inv_fact = 1;
    const auto raw = detail::stability_coefficients<HighFloat>(t);
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (k > 0) inv_fact /= static_cast<long>(k);
      const HighFloat target = to_high(inv_fact);
      if (static_cast<int>(k) <= t.order() && abs(raw[k] - target) <= HighFloat(tol) * target)
        out.coeffs.emplace_back(inv_fact);
      else if (abs(raw[k]) <= negligible_magnitude())
        out.coeffs.emplace_back(0);
      else
        out.coeffs.push_back(Coefficient::inexact(raw[k]));
    }
  }
  while (out.coeffs.size() > 1 && out.coeffs.back().is_zero()) out.coeffs.pop_back();
  return out;
}

/// Degree-p Taylor polynomial of exp.
inline StabilityPolynomial taylor_polynomial(int p) {
  StabilityPolynomial out;
  Rational c = 1;
  out.coeffs.emplace_back(c);
  for (int k = 1; k <= p; ++k) {
    c /= k;
    out.coeffs.emplace_back(c);
  }
  return out;
}

/// The search result. G <= 0 on [0, inner] is certified; G(outer) > 0.
struct IntervalCertificate {
  Rational inner = 0;
  Rational outer = 0;
  bool unbounded = false;
  /// Leaf cells left undecided: G <= 0 at both ends but the Bernstein
  /// coefficients do not prove it inside. Such cells can only hide an
  /// excursion narrower than the leaf width.
  std::size_t unresolved = 0;

  [[nodiscard]] double value() const {
    return unbounded ? std::numeric_limits<double>::infinity() : to_double(inner);
  }
};

namespace detail {

using RatPoly = std::vector<Rational>;

inline RatPoly poly_mul(const RatPoly& a, const RatPoly& b) {
  if (a.empty() || b.empty()) return {};
  RatPoly out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

inline RatPoly poly_add(RatPoly a, const RatPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rational(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

inline RatPoly rational_coeffs(const StabilityPolynomial& r) {
  RatPoly out;
  for (const auto& c : r.coeffs) out.push_back(c.is_exact() ? c.rational() : to_rational(c.high()));
  return out;
}

/// R(-x)^2 - 1.
inline RatPoly real_axis_polynomial(const StabilityPolynomial& r) {
  auto p = rational_coeffs(r);
  for (std::size_t k = 1; k < p.size(); k += 2) p[k] = -p[k];
  auto g = poly_mul(p, p);
  g[0] -= 1;
  return g;
}

/// |R(iy)|^2 - 1 = Re^2 + Im^2 - 1.
inline RatPoly imag_axis_polynomial(const StabilityPolynomial& r) {
  const auto p = rational_coeffs(r);
  RatPoly re(p.size(), Rational(0)), im(p.size(), Rational(0));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool neg = (k / 2) % 2 == 1;  // i^k = (+1, +i, -1, -i)
    (k % 2 == 0 ? re : im)[k] = neg ? Rational(-p[k]) : p[k];
  }
  auto g = poly_add(poly_mul(re, re), poly_mul(im, im));
  g[0] -= 1;
  return g;
}

inline void strip_common_twos(std::vector<Integer>& v) {
  std::size_t shift = std::numeric_limits<std::size_t>::max();
  for (const auto& x : v)
    if (x != 0) shift = std::min<std::size_t>(shift, boost::multiprecision::lsb(abs(x)));
  if (shift == 0 || shift == std::numeric_limits<std::size_t>::max()) return;
  for (auto& x : v) x >>= shift;
}

/// Midpoint split of integer Bernstein coefficients (scaled by 2^n).
inline std::pair<std::vector<Integer>, std::vector<Integer>> de_casteljau_split(const std::vector<Integer>& b) {
  const std::size_t n = b.size() - 1;
  std::vector<Integer> left(n + 1), right(n + 1);
  std::vector<Integer> row = b;
  left[0] = row[0] << n;
  right[n] = row[n] << n;
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t j = 0; j + r <= n; ++j) row[j] += row[j + 1];
    left[r] = row[0] << (n - r);
    right[n - r] = row[n - r] << (n - r);
  }
  strip_common_twos(left);
  strip_common_twos(right);
  return {std::move(left), std::move(right)};
}

}  // namespace detail

/// Smallest x > 0 beyond which G stops being <= 0, for G with G(0) = 0.
/// `leaf` is the width below which cells are no longer split; the returned
/// bracket [inner, outer] is at most that wide.
inline IntervalCertificate first_positive_crossing(detail::RatPoly g, const Rational& leaf) {
  IntervalCertificate cert;
  while (!g.empty() && g.back() == 0) g.pop_back();
  if (g.empty()) {
    cert.unbounded = true;
    return cert;
  }
  std::size_t low = 0;
  while (g[low] == 0) ++low;
  g.erase(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(low));
  if (g.front() > 0) return cert;  // violated immediately right of 0
  const std::size_t n = g.size() - 1;
  if (n == 0) {
    cert.unbounded = true;
    return cert;
  }

  // Integer coefficients with the same signs.
  Integer lcm_den = 1;
  for (const auto& c : g) lcm_den = boost::multiprecision::lcm(lcm_den, denominator(c));
  std::vector<Integer> q;
  for (const auto& c : g) q.push_back(numerator(c) * (lcm_den / denominator(c)));

  // Cauchy bound on positive roots, rounded up to a power of two.
  Rational bound = 0;
  for (std::size_t k = 0; k < n; ++k) bound = std::max(bound, Rational(abs(q[k]), abs(q[n])));
  bound += 1;
  Integer U = 1;
  while (Rational(U) < bound) U <<= 1;

  // Bernstein coefficients on [0, U], scaled by n!: B_i = sum_k C(i,k) k! (n-k)! q_k U^k.
  std::vector<Integer> fact(n + 1, Integer(1));
  for (std::size_t k = 1; k <= n; ++k) fact[k] = fact[k - 1] * static_cast<unsigned long>(k);
  std::vector<Integer> a(n + 1);
  Integer upow = 1;
  for (std::size_t k = 0; k <= n; ++k, upow *= U) a[k] = q[k] * upow;
  std::vector<Integer> bern(n + 1, Integer(0));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t k = 0; k <= i; ++k)
      if (a[k] != 0) bern[i] += fact[i] / (fact[k] * fact[i - k]) * fact[k] * fact[n - k] * a[k];
  detail::strip_common_twos(bern);

  struct Cell {
    Rational lo, hi;
    std::vector<Integer> coeffs;
  };
  std::vector<Cell> stack;
  stack.push_back({Rational(0), Rational(U), std::move(bern)});
  while (!stack.empty()) {
    Cell cell = std::move(stack.back());
    stack.pop_back();
    const bool nonpositive = std::all_of(cell.coeffs.begin(), cell.coeffs.end(), [](const Integer& x) { return x <= 0; });
    if (nonpositive) {
      cert.inner = cell.hi;
      continue;
    }
    if (cell.hi - cell.lo <= leaf) {
      if (cell.coeffs.back() > 0) {
        cert.outer = cell.hi;
        return cert;
      }
      ++cert.unresolved;
      cert.inner = cell.hi;
      continue;
    }
    auto [left, right] = detail::de_casteljau_split(cell.coeffs);
    const Rational mid = (cell.lo + cell.hi) / 2;
    stack.push_back({mid, cell.hi, std::move(right)});
    stack.push_back({cell.lo, mid, std::move(left)});
  }
  // No crossing below the root bound: G keeps the sign of its leading term.
  cert.unbounded = true;
  return cert;
}

inline const Rational& default_leaf_width() {
  static const Rational w(1, 1 << 20);
  return w;
}

inline IntervalCertificate real_interval(const StabilityPolynomial& r, const Rational& leaf = default_leaf_width()) {
  return first_positive_crossing(detail::real_axis_polynomial(r), leaf);
}

inline IntervalCertificate imag_interval(const StabilityPolynomial& r, const Rational& leaf = default_leaf_width()) {
  return first_positive_crossing(detail::imag_axis_polynomial(r), leaf);
}

/// Exact sign of |R|^2 - 1 at a rational point on the chosen axis.
inline int boundary_sign(const StabilityPolynomial& r, const Rational& x, bool imaginary) {
  const auto g = imaginary ? detail::imag_axis_polynomial(r) : detail::real_axis_polynomial(r);
  Rational acc = 0;
  for (std::size_t k = g.size(); k-- > 0;) acc = acc * x + g[k];
  return acc.sign();
}

struct StabilityReport {
  double I_real = 0;
  double I_imag = 0;
  IntervalCertificate real_cert;
  IntervalCertificate imag_cert;
};

inline StabilityReport stability_report(const StabilityPolynomial& r, const Rational& leaf = default_leaf_width()) {
  StabilityReport out;
  out.real_cert = real_interval(r, leaf);
  out.imag_cert = imag_interval(r, leaf);
  out.I_real = out.real_cert.value();
  out.I_imag = out.imag_cert.value();
  return out;
}

/// Largest sampled |R(iy)| - 1 on [0, y_max], evaluated in HighFloat. The
/// exact intervals above ignore nothing; this shows how far above 1 the
/// modulus gets, e.g. when an excursion is below double roundoff.
struct ExcursionSample {
  double max_excess = 0;
  double at = 0;
};

inline ExcursionSample imag_excursion(const StabilityPolynomial& r, double y_max, int samples = 2000) {
  ExcursionSample out{-1, 0};
  std::vector<HighFloat> c;
  for (const auto& x : r.coeffs) c.push_back(x.high());
  for (int k = 0; k <= samples; ++k) {
    const HighFloat y = HighFloat(y_max) * k / samples;
    // Horner in complex arithmetic: (re + i im) * (i y) = -im y + i re y.
    HighFloat re = 0, im = 0;
    for (std::size_t j = c.size(); j-- > 0;) {
      const HighFloat nre = -im * y + c[j];
      const HighFloat nim = re * y;
      re = nre;
      im = nim;
    }
    const double excess = (sqrt(re * re + im * im) - 1).convert_to<double>();
    if (excess > out.max_excess) out = {excess, y.convert_to<double>()};
  }
  return out;
}

}  // namespace rkx
