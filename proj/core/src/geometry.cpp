#include "agdcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace agdcert {

double primal_norm(NormKind norm, const Vec& v) {
  return norm == NormKind::euclidean ? norm2(v) : norm1(v);
}

double dual_norm(NormKind norm, const Vec& v) {
  return norm == NormKind::euclidean ? norm2(v) : norm_inf(v);
}

FeasibleSet FeasibleSet::whole_space(int dim) {
  FeasibleSet s;
  s.tag_ = Tag::whole_space;
  s.dim_ = dim;
  return s;
}

FeasibleSet FeasibleSet::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) throw ConfigError("box: bound size mismatch");
  require_finite(lower, "box lower");
  require_finite(upper, "box upper");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (lower[i] > upper[i]) throw ConfigError("box: lower bound exceeds upper bound");
  FeasibleSet s;
  s.tag_ = Tag::box;
  s.dim_ = int(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::ball(Vec center, double radius) {
  require_finite(center, "ball center");
  if (!(radius > 0.0)) throw ConfigError("ball: radius must be positive");
  FeasibleSet s;
  s.tag_ = Tag::ball;
  s.dim_ = int(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

FeasibleSet FeasibleSet::simplex(int dim) {
  if (dim < 1) throw ConfigError("simplex: dimension must be positive");
  FeasibleSet s;
  s.tag_ = Tag::simplex;
  s.dim_ = dim;
  return s;
}

bool FeasibleSet::contains(const Vec& x, double tol) const {
  if (int(x.size()) != dim_) return false;
  switch (tag_) {
    case Tag::whole_space:
      return true;
    case Tag::box:
      for (int i = 0; i < dim_; ++i)
        if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
      return true;
    case Tag::ball:
      return norm2(sub(x, center_)) <= radius_ + tol * (1.0 + radius_);
    case Tag::simplex: {
      double sum = 0.0;
      for (double xi : x) {
        if (xi < -tol) return false;
        sum += xi;
      }
      return std::fabs(sum - 1.0) <= tol * dim_;
    }
  }
  return false;
}

bool FeasibleSet::strictly_positive(const Vec& x) const {
  for (double xi : x)
    if (!(xi > 0.0)) return false;
  return true;
}

std::optional<double> FeasibleSet::euclidean_diameter() const {
  switch (tag_) {
    case Tag::whole_space:
      return std::nullopt;
    case Tag::box:
      return norm2(sub(upper_, lower_));
    case Tag::ball:
      return 2.0 * radius_;
    case Tag::simplex:
      // Distance between two vertices.
      return dim_ >= 2 ? std::sqrt(2.0) : 0.0;
  }
  return std::nullopt;
}

std::string FeasibleSet::describe() const {
  switch (tag_) {
    case Tag::whole_space:
      return "whole_space";
    case Tag::box:
      return "box";
    case Tag::ball:
      return "ball";
    case Tag::simplex:
      return "simplex";
  }
  return "?";
}

namespace {

Vec project_simplex(const Vec& x) {
  const int n = int(x.size());
  Vec u(x);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (int j = 1; j <= n; ++j) {
    cum += u[j - 1];
    const double t = (cum - 1.0) / j;
    // Coordinates equal to the threshold stay in the support.
    if (u[j - 1] - t >= 0.0) theta = t;
  }
  Vec r(x.size());
  for (int i = 0; i < n; ++i) r[i] = std::max(x[i] - theta, 0.0);
  return r;
}

}  // namespace

Vec project(const FeasibleSet& set, const Vec& x) {
  if (int(x.size()) != set.dim()) throw ConfigError("project: dimension mismatch");
  require_finite(x, "project input");
  switch (set.tag()) {
    case FeasibleSet::Tag::whole_space:
      return x;
    case FeasibleSet::Tag::box: {
      Vec r(x.size());
      for (int i = 0; i < set.dim(); ++i)
        r[i] = std::min(std::max(x[i], set.lower()[i]), set.upper()[i]);
      return r;
    }
    case FeasibleSet::Tag::ball: {
      const Vec d = sub(x, set.center());
      const double dist = norm2(d);
      if (dist <= set.radius()) return x;
      return add(set.center(), scaled(d, set.radius() / dist));
    }
    case FeasibleSet::Tag::simplex:
      return project_simplex(x);
  }
  throw ConfigError("project: unknown set");
}

Vec sample_feasible(const FeasibleSet& set, SplitMix64& rng) {
  const int n = set.dim();
  Vec x(n);
  switch (set.tag()) {
    case FeasibleSet::Tag::whole_space:
      for (int i = 0; i < n; ++i) x[i] = rng.normal();
      return x;
    case FeasibleSet::Tag::box:
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(set.lower()[i], set.upper()[i]);
      return x;
    case FeasibleSet::Tag::ball: {
      for (int i = 0; i < n; ++i) x[i] = rng.normal();
      const double r = set.radius() * std::pow(rng.next_double(), 1.0 / n);
      const double nrm = norm2(x);
      const double s = nrm > 0.0 ? r / nrm : 0.0;
      return add(set.center(), scaled(x, s));
    }
    case FeasibleSet::Tag::simplex: {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        x[i] = -std::log(1.0 - rng.next_double());
        sum += x[i];
      }
      for (int i = 0; i < n; ++i) x[i] /= sum;
      return x;
    }
  }
  throw ConfigError("sample_feasible: unknown set");
}

Vec sample_feasible_interior(const FeasibleSet& set, SplitMix64& rng, double margin) {
  Vec x = sample_feasible(set, rng);
  const int n = set.dim();
  switch (set.tag()) {
    case FeasibleSet::Tag::whole_space:
      return x;
    case FeasibleSet::Tag::box:
      for (int i = 0; i < n; ++i) {
        const double w = set.upper()[i] - set.lower()[i];
        const double m = std::min(margin * (1.0 + w), 0.45 * w);
        x[i] = std::min(std::max(x[i], set.lower()[i] + m), set.upper()[i] - m);
      }
      return x;
    case FeasibleSet::Tag::ball: {
      const Vec d = sub(x, set.center());
      const double dist = norm2(d);
      const double rmax = set.radius() * (1.0 - margin);
      if (dist <= rmax) return x;
      return add(set.center(), scaled(d, rmax / dist));
    }
    case FeasibleSet::Tag::simplex: {
      const double floor_mass = margin / n;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        x[i] = std::max(x[i], floor_mass);
        sum += x[i];
      }
      for (int i = 0; i < n; ++i) x[i] /= sum;
      return x;
    }
  }
  return x;
}

Geometry Geometry::euclidean(FeasibleSet set) {
  Geometry g;
  g.norm = NormKind::euclidean;
  g.dgf = Dgf::half_squared_euclidean;
  g.set = std::move(set);
  return g;
}

Geometry Geometry::entropy(FeasibleSet simplex_set) {
  if (simplex_set.tag() != FeasibleSet::Tag::simplex)
    throw ConfigError("entropy geometry requires a simplex feasible set");
  Geometry g;
  g.norm = NormKind::ell1;
  g.dgf = Dgf::negative_entropy;
  g.set = std::move(simplex_set);
  return g;
}

double bregman_divergence(const Geometry& geom, const Vec& x, const Vec& z) {
  if (x.size() != z.size()) throw ConfigError("bregman_divergence: dimension mismatch");
  if (geom.dgf == Geometry::Dgf::half_squared_euclidean) {
    const Vec d = sub(z, x);
    return 0.5 * dot(d, d);
  }
  // Entropy generator: sum z_i log(z_i/x_i) - sum z + sum x, with 0 log 0 = 0.
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0))
      throw DomainError("bregman_divergence: entropy generator needs strictly positive x");
    const double zi = std::max(z[i], 0.0);
    if (zi > 0.0) v += zi * std::log(zi / x[i]);
    v += x[i] - zi;
  }
  return std::max(v, 0.0);
}

namespace {

// The three-point inequality residual <g, p - w> - eta*(V(a,w) - V(p,w) - V(a,p))
// is affine in w for both generators; `beta` is its gradient and `base` its
// value at w = 0.
struct AffineResidual {
  double base = 0.0;
  Vec beta;

  double at(const Vec& w) const { return base + dot(beta, w); }
};

AffineResidual residual_form(const Geometry& geom, const Vec& g, const Vec& anchor,
                             const Vec& point, double eta) {
  AffineResidual r;
  const std::size_t n = g.size();
  r.beta.assign(n, 0.0);
  if (geom.dgf == Geometry::Dgf::half_squared_euclidean) {
    // V(a,w) - V(p,w) = <p - a, w> + (|a|^2 - |p|^2)/2.
    for (std::size_t i = 0; i < n; ++i) r.beta[i] = -g[i] - eta * (point[i] - anchor[i]);
    const double c0 = 0.5 * (dot(anchor, anchor) - dot(point, point));
    r.base = dot(g, point) - eta * (c0 - bregman_divergence(geom, anchor, point));
  } else {
    // V(a,w) - V(p,w) = <log(p/a), w> + (sum a - sum p).
    double c0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r.beta[i] = -g[i] - eta * std::log(point[i] / anchor[i]);
      c0 += anchor[i] - point[i];
    }
    r.base = dot(g, point) - eta * (c0 - bregman_divergence(geom, anchor, point));
  }
  return r;
}

double max_residual_over_set(const FeasibleSet& set, const AffineResidual& r, const Vec& anchor,
                             const Vec& point) {
  switch (set.tag()) {
    case FeasibleSet::Tag::box: {
      double m = r.base;
      for (int i = 0; i < set.dim(); ++i)
        m += std::max(r.beta[i] * set.lower()[i], r.beta[i] * set.upper()[i]);
      return m;
    }
    case FeasibleSet::Tag::simplex: {
      // Affine max over the simplex is attained at a vertex.
      double m = r.beta[0];
      for (double b : r.beta) m = std::max(m, b);
      return r.base + m;
    }
    case FeasibleSet::Tag::ball:
      return r.at(set.center()) + set.radius() * norm2(r.beta);
    case FeasibleSet::Tag::whole_space: {
      // No exact maximizer exists; probe around the solution at a few scales.
      double m = std::max(r.at(anchor), r.at(point));
      SplitMix64 rng(0x5eedf00dULL);
      const double scale = 1.0 + norm2(point) + norm2(sub(anchor, point));
      Vec w(point.size());
      for (int probe = 0; probe < 64; ++probe) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = point[i] + scale * rng.normal();
        m = std::max(m, r.at(w));
      }
      return m;
    }
  }
  return r.base;
}

}  // namespace

ProxResult bregman_prox(const Geometry& geom, const Vec& g, const Vec& anchor, double eta) {
  const FeasibleSet& set = geom.set;
  if (int(g.size()) != set.dim() || int(anchor.size()) != set.dim())
    throw ConfigError("bregman_prox: dimension mismatch");
  require_finite(g, "bregman_prox gradient");
  if (!(eta > 0.0)) throw ConfigError("bregman_prox: eta must be positive");
  if (!set.contains(anchor, 1e-9)) throw ConfigError("bregman_prox: anchor not feasible");

  ProxResult out;
  if (geom.dgf == Geometry::Dgf::half_squared_euclidean) {
    Vec target(anchor.size());
    for (std::size_t i = 0; i < anchor.size(); ++i) target[i] = anchor[i] - g[i] / eta;
    out.point = project(set, target);
  } else {
    if (!set.strictly_positive(anchor))
      throw DomainError("bregman_prox: entropy anchor must be strictly positive");
    // Multiplicative update x_i ∝ anchor_i * exp(-g_i/eta), normalized; the
    // max shift keeps exp() in range.
    const std::size_t n = anchor.size();
    Vec logits(n);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      logits[i] = std::log(anchor[i]) - g[i] / eta;
      mx = std::max(mx, logits[i]);
    }
    out.point.assign(n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.point[i] = std::exp(logits[i] - mx);
      sum += out.point[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.point[i] /= sum;
      // Keep coordinates strictly positive so the next prox stays in-domain.
      if (out.point[i] < 1e-300) out.point[i] = 1e-300;
    }
  }

  const AffineResidual r = residual_form(geom, g, anchor, out.point, eta);
  out.vi_residual = std::max(0.0, max_residual_over_set(set, r, anchor, out.point));
  return out;
}

std::optional<double> set_diameter(const Geometry& geom) {
  if (geom.dgf == Geometry::Dgf::negative_entropy) return std::nullopt;
  return geom.set.euclidean_diameter();
}

std::optional<double> max_divergence(const Geometry& geom) {
  if (geom.dgf == Geometry::Dgf::negative_entropy) return std::nullopt;
  const auto diam = geom.set.euclidean_diameter();
  if (!diam) return std::nullopt;
  return 0.5 * (*diam) * (*diam);
}

}  // namespace agdcert
