#include "agdcert/agd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace agdcert {

std::string to_string(MonotoneClass m) {
  switch (m) {
    case MonotoneClass::nonincreasing:
      return "nonincreasing";
    case MonotoneClass::nondecreasing:
      return "nondecreasing";
    case MonotoneClass::both:
      return "both";
    case MonotoneClass::neither:
      return "neither";
  }
  return "?";
}

void Schedule::finish(double lipschitz) {
  lipschitz_ = lipschitz;
  const int n = int(gamma_.size());
  gamma_cum_.assign(n, 1.0);
  for (int k = 2; k <= n; ++k) gamma_cum_[k - 1] = gamma_cum_[k - 2] * (1.0 - gamma_[k - 1]);

  bool noninc = true, nondec = true;
  for (int k = 1; k < n; ++k) {
    const double r0 = ratio(k);
    const double r1 = ratio(k + 1);
    const double tol = 1e-12 * std::max(std::fabs(r0), std::fabs(r1));
    if (r1 > r0 + tol) noninc = false;
    if (r1 < r0 - tol) nondec = false;
  }
  mono_ = noninc && nondec ? MonotoneClass::both
          : noninc         ? MonotoneClass::nonincreasing
          : nondec         ? MonotoneClass::nondecreasing
                           : MonotoneClass::neither;
}

Schedule Schedule::make(const std::string& name, double lipschitz, int horizon) {
  if (!(lipschitz > 0.0)) throw ConfigError("schedule: L must be positive");
  if (horizon < 1) throw ConfigError("schedule: horizon must be at least 1");
  Schedule s;
  s.name_ = name;
  s.gamma_.assign(horizon, 0.0);
  s.eta_.assign(horizon, 0.0);
  if (name == "s1") {
    for (int k = 1; k <= horizon; ++k) {
      s.gamma_[k - 1] = 2.0 / double(k + 1);
      s.eta_[k - 1] = 2.0 * lipschitz / double(k);
    }
  } else if (name == "s2") {
    for (int k = 1; k <= horizon; ++k) {
      if (k == 1) {
        s.gamma_[0] = 1.0;
      } else {
        // Positive root of g^2 = a(1-g), a = gamma_{k-1}^2, written in the
        // cancellation-free form.
        const double a = s.gamma_[k - 2] * s.gamma_[k - 2];
        s.gamma_[k - 1] = 2.0 * a / (a + std::sqrt(a * (a + 4.0)));
      }
      s.eta_[k - 1] = lipschitz * s.gamma_[k - 1];
    }
  } else if (name == "s3") {
    for (int k = 1; k <= horizon; ++k) {
      s.gamma_[k - 1] = 3.0 / double(k + 2);
      s.eta_[k - 1] = 3.0 * lipschitz / double(k);
    }
  } else {
    throw ConfigError("schedule: unknown name '" + name + "' (expected s1, s2 or s3)");
  }
  s.finish(lipschitz);
  return s;
}

Schedule Schedule::custom(Vec gamma, Vec eta, double lipschitz) {
  if (!(lipschitz > 0.0)) throw ConfigError("schedule: L must be positive");
  if (gamma.empty() || gamma.size() != eta.size())
    throw ConfigError("custom schedule: gamma/eta must be nonempty and equally sized");
  require_finite(gamma, "custom gamma");
  require_finite(eta, "custom eta");
  if (gamma[0] != 1.0) throw ConfigError("custom schedule: gamma_1 must equal 1");
  for (std::size_t k = 1; k < gamma.size(); ++k)
    if (!(gamma[k] > 0.0 && gamma[k] < 1.0))
      throw ConfigError("custom schedule: gamma_k must lie in (0,1) for k >= 2");
  for (std::size_t k = 0; k < eta.size(); ++k)
    if (eta[k] < lipschitz * gamma[k] * (1.0 - 1e-12))
      throw ConfigError("custom schedule: eta_k must be at least L * gamma_k");
  Schedule s;
  s.name_ = "custom";
  s.gamma_ = std::move(gamma);
  s.eta_ = std::move(eta);
  s.finish(lipschitz);
  return s;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

Trajectory run_agd(const Objective& obj, const Geometry& geom, const Schedule& sched,
                   const Vec& x0, int steps) {
  if (steps < 1) throw ConfigError("run_agd: steps must be at least 1");
  if (steps > sched.horizon()) throw ConfigError("run_agd: schedule horizon too short");
  if (int(x0.size()) != geom.set.dim() || obj.dimension() != geom.set.dim())
    throw ConfigError("run_agd: dimension mismatch");
  require_finite(x0, "x0");
  if (!geom.set.contains(x0, 1e-9)) throw ConfigError("run_agd: x0 not feasible");
  if (geom.dgf == Geometry::Dgf::negative_entropy && !geom.set.strictly_positive(x0))
    throw ConfigError("run_agd: x0 must be strictly positive under the entropy geometry");

  Trajectory t;
  t.steps = steps;
  t.x.resize(steps + 1);
  t.x_avg.resize(steps + 1);
  t.x_eval.resize(steps + 1);
  t.grad.resize(steps + 1);
  t.f_avg.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
  t.f_eval.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
  t.vi_residual.assign(steps + 1, 0.0);

  t.x[0] = x0;
  t.x_avg[0] = x0;
  t.f_avg[0] = obj.eval(x0);

  const std::size_t n = x0.size();
  for (int k = 1; k <= steps; ++k) {
    const double gk = sched.gamma(k);
    // x_eval_k = x_avg_{k-1} + gamma_k (x_{k-1} - x_avg_{k-1}); this form is
    // exact when the two anchors coincide bitwise (k = 2 under gamma_1 = 1).
    Vec xe(n);
    for (std::size_t i = 0; i < n; ++i)
      xe[i] = t.x_avg[k - 1][i] + gk * (t.x[k - 1][i] - t.x_avg[k - 1][i]);
    t.x_eval[k] = std::move(xe);
    t.f_eval[k] = obj.eval(t.x_eval[k]);
    t.grad[k] = obj.grad(t.x_eval[k]);

    ProxResult prox = bregman_prox(geom, t.grad[k], t.x[k - 1], sched.eta(k));
    t.x[k] = std::move(prox.point);
    t.vi_residual[k] = prox.vi_residual;

    // x_avg_k = (1 - gamma_k) x_avg_{k-1} + gamma_k x_k; exact at gamma = 1.
    Vec xa(n);
    const double omg = 1.0 - gk;
    for (std::size_t i = 0; i < n; ++i) xa[i] = omg * t.x_avg[k - 1][i] + gk * t.x[k][i];
    t.x_avg[k] = std::move(xa);
    t.f_avg[k] = obj.eval(t.x_avg[k]);

    if (!all_finite(t.x[k]) || !std::isfinite(t.f_avg[k]) || !std::isfinite(t.f_eval[k]))
      throw NumericalError("run_agd: non-finite value at step " + std::to_string(k));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Bound evaluators
// ---------------------------------------------------------------------------

double BoundReport::min_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (double s : slack) m = std::min(m, s);
  return m;
}

namespace {

BoundReport not_applicable(const std::string& id, const std::string& why) {
  BoundReport r;
  r.id = id;
  r.applicable = false;
  r.note = why;
  return r;
}

void push(BoundReport& r, int k, double bound, double gap) {
  r.k.push_back(k);
  r.bound.push_back(bound);
  r.gap.push_back(gap);
  r.slack.push_back(bound - gap);
}

bool ratio_nonincreasing(MonotoneClass m) {
  return m == MonotoneClass::nonincreasing || m == MonotoneClass::both;
}
bool ratio_nondecreasing(MonotoneClass m) {
  return m == MonotoneClass::nondecreasing || m == MonotoneClass::both;
}

double sq(double x) { return x * x; }

}  // namespace

double avg_bound_direct_sum(const Schedule& sched, const Trajectory& traj, const Geometry& geom,
                            const Vec& x_ref, int k) {
  double s = 0.0;
  for (int i = 1; i <= k; ++i) {
    const double dv = bregman_divergence(geom, traj.x[i - 1], x_ref) -
                      bregman_divergence(geom, traj.x[i], x_ref);
    s += sched.ratio(i) * dv;
  }
  return sched.gamma_cum(k) * s;
}

std::vector<BoundReport> avg_bounds(const Schedule& sched, const Trajectory& traj,
                                    const Geometry& geom, const Vec& x_ref, double f_ref) {
  std::vector<BoundReport> out;
  const int N = traj.steps;
  const double L = sched.lipschitz();
  const double v0 = bregman_divergence(geom, traj.x[0], x_ref);

  {
    // Telescoped inequality, evaluated by unrolling the weighted recursion.
    BoundReport r;
    r.id = "avg_general";
    double acc = 0.0;
    for (int k = 1; k <= N; ++k) {
      const double dv = bregman_divergence(geom, traj.x[k - 1], x_ref) -
                        bregman_divergence(geom, traj.x[k], x_ref);
      acc = (1.0 - sched.gamma(k)) * acc + sched.gamma(k) * sched.eta(k) * dv;
      push(r, k, acc, traj.f_avg[k] - f_ref);
    }
    out.push_back(std::move(r));
  }

  if (sched.name() == "s1") {
    BoundReport r;
    r.id = "avg_s1";
    for (int k = 1; k <= N; ++k)
      push(r, k, 4.0 * L / (double(k) * (k + 1)) * v0, traj.f_avg[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable("avg_s1", "schedule is not s1"));
  }

  if (sched.name() == "s2") {
    BoundReport r;
    r.id = "avg_s2";
    for (int k = 1; k <= N; ++k)
      push(r, k, 4.0 * L / sq(double(k + 1)) * v0, traj.f_avg[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable("avg_s2", "schedule is not s2"));
  }

  if (sched.name() == "s3") {
    const auto sup_v = max_divergence(geom);
    if (sup_v) {
      BoundReport r;
      r.id = "avg_s3_diam";
      for (int k = 1; k <= N; ++k)
        push(r, k, 9.0 * L * (*sup_v) / (double(k) * (k + 2)), traj.f_avg[k] - f_ref);
      out.push_back(std::move(r));
    } else {
      out.push_back(not_applicable("avg_s3_diam", "divergence sup is unbounded"));
    }
  } else {
    out.push_back(not_applicable("avg_s3_diam", "schedule is not s3"));
  }
  return out;
}

std::vector<BoundReport> eval_bounds(const Schedule& sched, const Trajectory& traj,
                                     const Geometry& geom, const Vec& x_ref, double f_ref,
                                     bool x_ref_is_optimum) {
  std::vector<BoundReport> out;
  const int N = traj.steps;
  const double L = sched.lipschitz();
  const bool euclid = geom.norm == NormKind::euclidean;
  const MonotoneClass mono = sched.monotonicity();
  const auto diam = set_diameter(geom);
  const auto sup_v = max_divergence(geom);
  const double v0 = bregman_divergence(geom, traj.x[0], x_ref);
  const double r0_sq = [&] {
    const Vec d = sub(traj.x[0], x_ref);
    return dot(d, d);
  }();

  const auto ratio_excess = [&](int k) {
    // max{0, (gamma_k/G_k)^2 - (gamma_{k-1}/G_{k-1})^2}
    return std::max(0.0, sq(sched.gamma(k) / sched.gamma_cum(k)) -
                             sq(sched.gamma(k - 1) / sched.gamma_cum(k - 1)));
  };
  const auto ratio_blowup = [&](int k) {
    // max{1, (G_{k-1} gamma_k / (gamma_{k-1} G_k))^2}
    return std::max(1.0, sq(sched.gamma_cum(k - 1) * sched.gamma(k) /
                            (sched.gamma(k - 1) * sched.gamma_cum(k))));
  };

  // Euclidean family.
  if (euclid && ratio_nonincreasing(mono)) {
    BoundReport r;
    r.id = "eval_general";
    for (int k = 2; k <= N; ++k) {
      const Vec dk = sub(traj.x[k - 1], x_ref);
      const double b = sched.gamma_cum(k) * sched.eta(1) / 2.0 * r0_sq +
                       ratio_excess(k) * sched.gamma_cum(k) * sched.gamma_cum(k - 1) *
                           sched.eta(k - 1) / (2.0 * sched.gamma(k - 1)) * dot(dk, dk);
      push(r, k, b, traj.f_eval[k] - f_ref);
    }
    out.push_back(std::move(r));

    if (x_ref_is_optimum) {
      BoundReport ro;
      ro.id = "eval_opt";
      for (int k = 2; k <= N; ++k)
        push(ro, k, ratio_blowup(k) * sched.gamma_cum(k) * sched.eta(1) / 2.0 * r0_sq,
             traj.f_eval[k] - f_ref);
      out.push_back(std::move(ro));
    } else {
      out.push_back(not_applicable("eval_opt", "reference point is not a minimizer"));
    }
  } else {
    const std::string why = euclid ? "ratio is not nonincreasing" : "geometry is not euclidean";
    out.push_back(not_applicable("eval_general", why));
    out.push_back(not_applicable("eval_opt", why));
  }

  if (euclid && ratio_nondecreasing(mono) && diam) {
    BoundReport r;
    r.id = "eval_diam";
    const double d2 = (*diam) * (*diam);
    for (int k = 2; k <= N; ++k) {
      const double b = ratio_blowup(k) * sched.gamma_cum(k) * sched.gamma(k - 1) *
                       sched.eta(k - 1) / (2.0 * sched.gamma_cum(k - 1)) * d2;
      push(r, k, b, traj.f_eval[k] - f_ref);
    }
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable(
        "eval_diam", !euclid          ? "geometry is not euclidean"
                     : !diam          ? "set diameter is unbounded"
                                      : "ratio is not nondecreasing"));
  }

  // Divergence-based family (valid for any geometry with modulus-1 generator,
  // including the euclidean one).
  if (ratio_nonincreasing(mono) && N >= 3) {
    BoundReport r;
    r.id = "eval_bregman_general";
    for (int k = 3; k <= N; ++k) {
      const double b = sched.gamma_cum(k) * sched.eta(1) * v0 +
                       sched.gamma_cum(k) * sched.gamma_cum(k - 1) * sched.eta(k - 1) /
                           sched.gamma(k - 1) * ratio_excess(k) *
                           bregman_divergence(geom, traj.x[k - 1], x_ref) +
                       sched.gamma(k) * sched.eta(k - 1) *
                           bregman_divergence(geom, traj.x[k - 2], x_ref);
      push(r, k, b, traj.f_eval[k] - f_ref);
    }
    out.push_back(std::move(r));

    if (x_ref_is_optimum) {
      BoundReport ro;
      ro.id = "eval_bregman_opt";
      for (int k = 3; k <= N; ++k) {
        const double carry = sched.gamma_cum(k - 2) * sched.gamma(k) * sched.eta(k - 1) /
                             (sched.gamma_cum(k) * sched.gamma(k - 2) * sched.eta(k - 2));
        push(ro, k, (ratio_blowup(k) + carry) * sched.gamma_cum(k) * sched.eta(1) * v0,
             traj.f_eval[k] - f_ref);
      }
      out.push_back(std::move(ro));
    } else {
      out.push_back(not_applicable("eval_bregman_opt", "reference point is not a minimizer"));
    }
  } else {
    const std::string why =
        N < 3 ? "needs at least 3 steps" : "ratio is not nonincreasing";
    out.push_back(not_applicable("eval_bregman_general", why));
    out.push_back(not_applicable("eval_bregman_opt", why));
  }

  if (ratio_nondecreasing(mono) && sup_v && N >= 3) {
    BoundReport r;
    r.id = "eval_bregman_diam";
    for (int k = 3; k <= N; ++k) {
      const double flip = sched.gamma_cum(k) * sched.gamma(k - 1) /
                          (sched.gamma_cum(k - 1) * sched.gamma(k));
      const double b = sched.gamma(k) * sched.eta(k - 1) *
                       (std::max(flip, 1.0 / flip) + 1.0) * (*sup_v);
      push(r, k, b, traj.f_eval[k] - f_ref);
    }
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable(
        "eval_bregman_diam", N < 3     ? "needs at least 3 steps"
                             : !sup_v  ? "divergence sup is unbounded"
                                       : "ratio is not nondecreasing"));
  }

  // Schedule-specific constants.
  if (sched.name() == "s1" && euclid && x_ref_is_optimum) {
    BoundReport r;
    r.id = "eval_s1";
    for (int k = 2; k <= N; ++k)
      push(r, k, 2.0 * k * L / (sq(double(k - 1)) * (k + 1)) * r0_sq, traj.f_eval[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable("eval_s1", "needs s1, euclidean geometry and a minimizer"));
  }

  if (sched.name() == "s2" && euclid && x_ref_is_optimum) {
    BoundReport r;
    r.id = "eval_s2";
    for (int k = 2; k <= N; ++k)
      push(r, k, 2.0 * L / sq(double(k)) * r0_sq, traj.f_eval[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable("eval_s2", "needs s2, euclidean geometry and a minimizer"));
  }

  if (sched.name() == "s3" && euclid && diam) {
    BoundReport r;
    r.id = "eval_s3_diam";
    const double d2 = (*diam) * (*diam);
    for (int k = 2; k <= N; ++k)
      push(r, k, 9.0 * L * (k + 1) / (2.0 * sq(double(k - 1)) * (k + 2)) * d2,
           traj.f_eval[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(
        not_applicable("eval_s3_diam", "needs s3, euclidean geometry and a bounded set"));
  }

  if (sched.name() == "s1" && x_ref_is_optimum && N >= 3) {
    BoundReport r;
    r.id = "eval_bregman_s1";
    for (int k = 3; k <= N; ++k)
      push(r, k, 4.0 * (2.0 * k - 1.0) * L / (sq(double(k - 1)) * (k + 1)) * v0,
           traj.f_eval[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(
        not_applicable("eval_bregman_s1", "needs s1, a minimizer and at least 3 steps"));
  }

  if (sched.name() == "s2" && x_ref_is_optimum && N >= 3) {
    BoundReport r;
    r.id = "eval_bregman_s2";
    for (int k = 3; k <= N; ++k)
      push(r, k, 4.0 * (2.0 * k + 1.0) * L / (sq(double(k)) * (k + 1)) * v0,
           traj.f_eval[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(
        not_applicable("eval_bregman_s2", "needs s2, a minimizer and at least 3 steps"));
  }

  if (sched.name() == "s3" && sup_v && N >= 3) {
    BoundReport r;
    r.id = "eval_bregman_s3_diam";
    for (int k = 3; k <= N; ++k)
      push(r, k, 18.0 * k * L / (sq(double(k - 1)) * (k + 2)) * (*sup_v),
           traj.f_eval[k] - f_ref);
    out.push_back(std::move(r));
  } else {
    out.push_back(not_applicable("eval_bregman_s3_diam",
                                 "needs s3, a bounded divergence sup and at least 3 steps"));
  }

  return out;
}

BoundReport eval_bound_unconstrained(const Schedule& sched, const Trajectory& traj,
                                     const Geometry& geom, const Vec& x_star, double f_star) {
  if (sched.name() != "s1") return not_applicable("eval_unconstrained_s1", "schedule is not s1");
  if (geom.norm != NormKind::euclidean ||
      geom.set.tag() != FeasibleSet::Tag::whole_space)
    return not_applicable("eval_unconstrained_s1", "needs the unconstrained euclidean setup");
  BoundReport r;
  r.id = "eval_unconstrained_s1";
  const Vec d = sub(x_star, traj.x[0]);
  const double r2 = dot(d, d);
  const double L = sched.lipschitz();
  for (int k = 1; k <= traj.steps; ++k)
    push(r, k, 2.0 * L / (double(k) * (k + 1)) * r2, traj.f_eval[k] - f_star);
  return r;
}

DeltaBreakdown compute_delta(const Schedule& sched, const Trajectory& traj, const Objective& obj,
                             const Geometry& geom, const Vec& x_ref) {
  const int N = traj.steps;
  if (N < 1) throw ConfigError("compute_delta: empty trajectory");
  const double L = sched.lipschitz();
  const NormKind norm = geom.norm;
  const Vec g_ref = obj.grad(x_ref);

  DeltaBreakdown d;
  d.final_grad_inner = sched.gamma(N) / sched.gamma_cum(N) *
                       dot(traj.grad[N], sub(traj.x[N - 1], traj.x[N]));
  {
    const double dist = primal_norm(norm, sub(x_ref, traj.x[0]));
    d.anchor_distance = -0.5 * sched.eta(1) * dist * dist;
  }
  for (int k = 2; k <= N; ++k) {
    const Vec dg = sub(traj.grad[k], traj.grad[k - 1]);
    d.grad_shift_inner += sched.gamma(k - 1) / sched.gamma_cum(k - 1) *
                          dot(dg, sub(traj.x[k - 1], traj.x[k - 2]));
    const double dn = dual_norm(norm, dg);
    d.grad_shift_norm -= dn * dn / (2.0 * L * sched.gamma_cum(k - 1));
  }
  for (int k = 1; k <= N; ++k) {
    const double dn = dual_norm(norm, sub(g_ref, traj.grad[k]));
    d.ref_grad_norm -= sched.gamma(k) / (2.0 * L * sched.gamma_cum(k)) * dn * dn;
    d.prox_inner +=
        sched.gamma(k) / sched.gamma_cum(k) * dot(traj.grad[k], sub(traj.x[k], x_ref));
  }
  d.total = d.final_grad_inner + d.anchor_distance + d.grad_shift_inner + d.grad_shift_norm +
            d.ref_grad_norm + d.prox_inner;

  const double dist0 = primal_norm(norm, sub(traj.x[0], x_ref));
  d.bound_value = sched.gamma_cum(N) * (0.5 * sched.eta(1) * dist0 * dist0 + d.total);
  d.gap = traj.f_eval[N] - obj.eval(x_ref);
  d.slack = d.bound_value - d.gap;
  return d;
}

std::string trajectory_csv(const Trajectory& traj, double f_ref,
                           const std::vector<BoundReport>& reports) {
  std::vector<std::string> cols = {"k", "f_xbar", "f_xunder", "gap_xbar", "gap_xunder"};
  std::vector<const BoundReport*> active;
  for (const auto& r : reports)
    if (r.applicable) active.push_back(&r);
  for (const auto* r : active) cols.push_back("bound_" + r->id);
  for (const auto* r : active) cols.push_back("slack_" + r->id);
  cols.push_back("vi_residual");

  CsvWriter csv(cols);
  for (int k = 1; k <= traj.steps; ++k) {
    std::vector<std::string> row;
    row.push_back(std::to_string(k));
    row.push_back(fmt_double(traj.f_avg[k]));
    row.push_back(fmt_double(traj.f_eval[k]));
    row.push_back(fmt_double(traj.f_avg[k] - f_ref));
    row.push_back(fmt_double(traj.f_eval[k] - f_ref));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto* r : active) {
        // Bound rows are sparse in k when the result needs a minimum step.
        const auto it = std::lower_bound(r->k.begin(), r->k.end(), k);
        if (it != r->k.end() && *it == k) {
          const std::size_t idx = std::size_t(it - r->k.begin());
          row.push_back(fmt_double(pass == 0 ? r->bound[idx] : r->slack[idx]));
        } else {
          row.push_back("");
        }
      }
    }
    row.push_back(fmt_double(traj.vi_residual[k]));
    csv.add_row(row);
  }
  return csv.str();
}

}  // namespace agdcert
