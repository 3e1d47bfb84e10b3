#pragma once

#include <cmath>
#include <functional>

#include "agdcert/geometry.hpp"
#include "agdcert/linalg.hpp"
#include "agdcert/util.hpp"

namespace agdcert::testutil {

// Random orthogonal matrix via modified Gram-Schmidt on a gaussian sample;
// test-side construction kept independent of the library under test.
inline Matrix random_orthogonal(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix q(n, n);
  for (int j = 0; j < n; ++j) {
    Vec col(n);
    for (int i = 0; i < n; ++i) col[i] = rng.normal();
    for (int prev = 0; prev < j; ++prev) {
      double proj = 0.0;
      for (int i = 0; i < n; ++i) proj += q(i, prev) * col[i];
      for (int i = 0; i < n; ++i) col[i] -= proj * q(i, prev);
    }
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += col[i] * col[i];
    nrm = std::sqrt(nrm);
    for (int i = 0; i < n; ++i) q(i, j) = col[i] / nrm;
  }
  return q;
}

// Q * diag(d) * Q'.
inline SymMatrix spectral_assemble(const Matrix& q, const Vec& d) {
  const int n = q.rows();
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q(i, k) * d[k] * q(j, k);
      a.at(i, j) = s;
    }
  return a;
}

inline SymMatrix random_sym(int n, std::uint64_t seed, double scale = 1.0) {
  SplitMix64 rng(seed);
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.at(i, j) = scale * rng.normal();
  return a;
}

// M'M + I: well-conditioned SPD test matrix.
inline SymMatrix random_spd(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  SymMatrix a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = i == j ? 1.0 : 0.0;
      for (int k = 0; k < n; ++k) s += m(k, i) * m(k, j);
      a.at(i, j) = s;
    }
  return a;
}

inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             int iters = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Brute-force 2-d minimizer of <g,x> + eta/2 ||x - anchor||^2 over the set,
// reduced to nested/parametric golden-section searches per set shape.
inline Vec brute_force_euclidean_prox(const FeasibleSet& set, const Vec& g, const Vec& anchor,
                                      double eta) {
  const auto obj = [&](const Vec& x) {
    const Vec d = sub(x, anchor);
    return dot(g, x) + 0.5 * eta * dot(d, d);
  };
  switch (set.tag()) {
    case FeasibleSet::Tag::box: {
      // Separable: independent 1-d searches.
      Vec r(2);
      for (int i = 0; i < 2; ++i) {
        const auto fi = [&](double t) {
          return g[i] * t + 0.5 * eta * (t - anchor[i]) * (t - anchor[i]);
        };
        r[i] = golden_section(fi, set.lower()[i], set.upper()[i]);
      }
      return r;
    }
    case FeasibleSet::Tag::ball: {
      Vec unc(2);
      for (int i = 0; i < 2; ++i) unc[i] = anchor[i] - g[i] / eta;
      if (set.contains(unc, 0.0)) return unc;
      const auto on_circle = [&](double th) {
        const Vec x = {set.center()[0] + set.radius() * std::cos(th),
                       set.center()[1] + set.radius() * std::sin(th)};
        return obj(x);
      };
      // Search two overlapping arcs to dodge the wrap-around seam.
      const double t1 = golden_section(on_circle, -3.2, 3.2);
      const double t2 = golden_section(on_circle, 0.0, 6.4);
      const double best = on_circle(t1) <= on_circle(t2) ? t1 : t2;
      return {set.center()[0] + set.radius() * std::cos(best),
              set.center()[1] + set.radius() * std::sin(best)};
    }
    case FeasibleSet::Tag::simplex: {
      const auto on_edge = [&](double t) { return obj({t, 1.0 - t}); };
      const double t = golden_section(on_edge, 0.0, 1.0);
      return {t, 1.0 - t};
    }
    case FeasibleSet::Tag::whole_space: {
      Vec unc(2);
      for (int i = 0; i < 2; ++i) unc[i] = anchor[i] - g[i] / eta;
      return unc;
    }
  }
  return anchor;
}

}  // namespace agdcert::testutil
