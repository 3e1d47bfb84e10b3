#pragma once

#include <string>
#include <vector>

#include "agdcert/geometry.hpp"
#include "agdcert/problems.hpp"

namespace agdcert {

// Monotonicity class of the ratio gamma_k * eta_k / gamma_cum_k, which
// selects the applicable convergence results.
enum class MonotoneClass { nonincreasing, nondecreasing, both, neither };

std::string to_string(MonotoneClass m);

// Parameter triple (gamma_k, eta_k, cumulative product of (1 - gamma_k)) for
// the accelerated method. gamma_1 = 1, gamma_k in (0,1) afterwards, and
// eta_k >= L * gamma_k.
class Schedule {
 public:
  // name is one of "s1" (gamma = 2/(k+1), eta = 2L/k),
  // "s2" (gamma_k solves g^2 = gamma_{k-1}^2 (1-g), eta = L*gamma) or
  // "s3" (gamma = 3/(k+2), eta = 3L/k).
  static Schedule make(const std::string& name, double lipschitz, int horizon);
  static Schedule custom(Vec gamma, Vec eta, double lipschitz);

  const std::string& name() const { return name_; }
  double lipschitz() const { return lipschitz_; }
  int horizon() const { return int(gamma_.size()); }

  // All accessors are 1-based in the step index.
  double gamma(int k) const { return gamma_.at(k - 1); }
  double eta(int k) const { return eta_.at(k - 1); }
  double gamma_cum(int k) const { return gamma_cum_.at(k - 1); }
  // gamma_k * eta_k / gamma_cum_k.
  double ratio(int k) const { return gamma(k) * eta(k) / gamma_cum(k); }

  MonotoneClass monotonicity() const { return mono_; }

  Schedule() = default;  // empty; build through make() or custom()

 private:
  void finish(double lipschitz);

  std::string name_;
  double lipschitz_ = 0.0;
  Vec gamma_, eta_, gamma_cum_;
  MonotoneClass mono_ = MonotoneClass::neither;
};

// Full record of one run: the prox sequence x_k, the averaged outputs
// x_avg_k, the gradient-evaluation points x_eval_k, gradients, objective
// values and prox residuals. Index 0 of the eval/grad arrays is unused.
struct Trajectory {
  int steps = 0;
  std::vector<Vec> x;        // 0..N
  std::vector<Vec> x_avg;    // 0..N, x_avg[0] == x[0]
  std::vector<Vec> x_eval;   // 1..N
  std::vector<Vec> grad;     // 1..N
  std::vector<double> f_avg;   // 0..N
  std::vector<double> f_eval;  // 1..N
  std::vector<double> vi_residual;  // 1..N
};

Trajectory run_agd(const Objective& obj, const Geometry& geom, const Schedule& sched,
                   const Vec& x0, int steps);

// One named convergence bound evaluated along a trajectory. When
// `applicable` is false the reason is in `note` and the arrays are empty.
struct BoundReport {
  std::string id;
  bool applicable = true;
  std::string note;
  std::vector<int> k;
  Vec bound;  // bound value at each listed k
  Vec gap;    // measured f(.) - f_ref
  Vec slack;  // bound - gap; nonnegative up to tolerance when the run is sound

  double min_slack() const;
};

// Bounds on the averaged sequence: the general telescoped inequality plus
// the schedule-specific constants.
std::vector<BoundReport> avg_bounds(const Schedule& sched, const Trajectory& traj,
                                    const Geometry& geom, const Vec& x_ref, double f_ref);

// Direct term-by-term evaluation of the telescoped averaged-sequence bound
// at step k; used to cross-check the recursive evaluation.
double avg_bound_direct_sum(const Schedule& sched, const Trajectory& traj, const Geometry& geom,
                            const Vec& x_ref, int k);

// Bounds on the gradient-evaluation sequence, Euclidean and divergence-based
// families. x_ref_is_optimum enables the bounds that are only valid against
// a minimizer.
std::vector<BoundReport> eval_bounds(const Schedule& sched, const Trajectory& traj,
                                     const Geometry& geom, const Vec& x_ref, double f_ref,
                                     bool x_ref_is_optimum);

// Unconstrained Euclidean bound for the s1 schedule:
// f(x_eval_N) - f* <= 2L/(N(N+1)) * ||x* - x0||^2.
BoundReport eval_bound_unconstrained(const Schedule& sched, const Trajectory& traj,
                                     const Geometry& geom, const Vec& x_star, double f_star);

// Decomposition of the aggregate error term whose weighted sum bounds
// f(x_eval_N) - f(x_ref).
struct DeltaBreakdown {
  double final_grad_inner = 0.0;   // (gamma_N/G_N) <g_N, x_{N-1} - x_N>
  double anchor_distance = 0.0;    // -eta_1/2 * ||x_ref - x0||^2
  double grad_shift_inner = 0.0;   // sum (gamma_{k-1}/G_{k-1}) <g_k - g_{k-1}, x_{k-1} - x_{k-2}>
  double grad_shift_norm = 0.0;    // -sum 1/(2 L G_{k-1}) ||g_{k-1} - g_k||_*^2
  double ref_grad_norm = 0.0;      // -sum gamma_k/(2 L G_k) ||g_ref - g_k||_*^2
  double prox_inner = 0.0;         // sum gamma_k/G_k <g_k, x_k - x_ref>
  double total = 0.0;              // sum of the six terms above

  double bound_value = 0.0;  // G_N * (eta_1/2 * ||x0 - x_ref||^2 + total)
  double gap = 0.0;          // f(x_eval_N) - f(x_ref)
  double slack = 0.0;        // bound_value - gap
};

DeltaBreakdown compute_delta(const Schedule& sched, const Trajectory& traj, const Objective& obj,
                             const Geometry& geom, const Vec& x_ref);

// CSV with one row per step: k, f_xbar, f_xunder, gap_xbar, gap_xunder,
// bound_<id>..., slack_<id>..., vi_residual. Cells where a bound does not
// apply are left empty.
std::string trajectory_csv(const Trajectory& traj, double f_ref,
                           const std::vector<BoundReport>& reports);

}  // namespace agdcert
