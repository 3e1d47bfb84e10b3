#pragma once

#include <optional>
#include <string>

#include "agdcert/linalg.hpp"
#include "agdcert/util.hpp"

namespace agdcert {

// Prox anchor outside the domain of the distance-generating function
// (e.g. a nonpositive coordinate under the entropy setup).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

enum class NormKind { euclidean, ell1 };

double primal_norm(NormKind norm, const Vec& v);
// Dual of euclidean is euclidean; dual of ell1 is ell-infinity.
double dual_norm(NormKind norm, const Vec& v);

class FeasibleSet {
 public:
  enum class Tag { whole_space, box, ball, simplex };

  static FeasibleSet whole_space(int dim);
  static FeasibleSet box(Vec lower, Vec upper);
  static FeasibleSet ball(Vec center, double radius);
  static FeasibleSet simplex(int dim);

  Tag tag() const { return tag_; }
  int dim() const { return dim_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(const Vec& x, double tol = 1e-12) const;
  // Strict positivity / interiority as required by entropy prox anchors.
  bool strictly_positive(const Vec& x) const;
  // Largest Euclidean distance between two members; nullopt when unbounded.
  std::optional<double> euclidean_diameter() const;
  std::string describe() const;

  FeasibleSet() = default;  // empty whole space; reassign via the factories

 private:
  Tag tag_ = Tag::whole_space;
  int dim_ = 0;
  Vec lower_, upper_, center_;
  double radius_ = 0.0;
};

// Euclidean projection onto the set (componentwise clamp for boxes, radial
// scaling for balls, sort-and-threshold for the probability simplex).
Vec project(const FeasibleSet& set, const Vec& x);

// Deterministic feasible sample (uniform-ish; exact distribution is not part
// of the contract, only feasibility and determinism are).
Vec sample_feasible(const FeasibleSet& set, SplitMix64& rng);
// Feasible and bounded away from the boundary where the set has one.
Vec sample_feasible_interior(const FeasibleSet& set, SplitMix64& rng, double margin = 1e-3);

struct Geometry {
  enum class Dgf { half_squared_euclidean, negative_entropy };

  // Pairings are fixed: the quadratic generator goes with the euclidean norm,
  // the entropy generator with the ell1 norm on the simplex.
  static Geometry euclidean(FeasibleSet set);
  static Geometry entropy(FeasibleSet simplex_set);

  NormKind norm = NormKind::euclidean;
  Dgf dgf = Dgf::half_squared_euclidean;
  FeasibleSet set;
};

// V(x, z) generated by the geometry's distance-generating function:
// 0.5*||z-x||_2^2 in the quadratic case, the KL-type divergence in the
// entropy case (0*log 0 = 0 convention). Always >= 0.5*||x-z||^2 in the
// geometry's norm.
double bregman_divergence(const Geometry& geom, const Vec& x, const Vec& z);

struct ProxResult {
  Vec point;
  // Largest observed violation of the three-point optimality inequality over
  // the probe set (exact set maximization for box/ball/simplex, random
  // probes for the whole space); floored at zero.
  double vi_residual = 0.0;
};

// argmin over the set of <g, x> + eta * V(anchor, x).
ProxResult bregman_prox(const Geometry& geom, const Vec& g, const Vec& anchor, double eta);

// Largest Euclidean distance between members, as used by diameter-based
// bounds; nullopt when unbounded or when the geometry is entropy-based.
std::optional<double> set_diameter(const Geometry& geom);

// sup of V over the set (0.5 * diameter^2 for the quadratic generator);
// nullopt when the sup is infinite (entropy generator, unbounded sets).
std::optional<double> max_divergence(const Geometry& geom);

}  // namespace agdcert
