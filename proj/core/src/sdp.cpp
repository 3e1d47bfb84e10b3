#include "agdcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>

#include <json.hpp>

namespace agdcert {

void SdpInstance::validate() const {
  if (nonneg_dim < 0 || psd_order < 0) throw ConfigError("sdp: negative cone dimension");
  if (psd_order > 128) throw ConfigError("sdp: psd block order exceeds the 128 guard");
  const int n = var_dim();
  if (n <= 0) throw ConfigError("sdp: empty variable space");
  if (int(objective.size()) != n) throw ConfigError("sdp: objective length mismatch");
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != n)
    throw ConfigError("sdp: constraint matrix width mismatch");
  if (int(rhs.size()) != eq_matrix.rows()) throw ConfigError("sdp: rhs length mismatch");
  require_finite(objective, "sdp objective");
  require_finite(rhs, "sdp rhs");
  if (!all_finite(eq_matrix.data())) throw ConfigError("sdp constraint matrix has non-finite entries");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved:
      return "solved";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::infeasible_suspected:
      return "infeasible_suspected";
  }
  return "?";
}

namespace {

// Projects the orthant/PSD product cone in place.
void project_cone(Vec& z, int nonneg_dim, int psd_order) {
  for (int i = 0; i < nonneg_dim; ++i) z[i] = std::max(z[i], 0.0);
  if (psd_order == 0) return;
  const Vec seg(z.begin() + nonneg_dim, z.end());
  const Vec proj = svec(psd_project(smat(seg)));
  std::copy(proj.begin(), proj.end(), z.begin() + nonneg_dim);
}

// Frobenius distance to the cone's dual (= the cone itself here).
double cone_dual_distance(const Vec& s, int nonneg_dim, int psd_order) {
  double acc = 0.0;
  for (int i = 0; i < nonneg_dim; ++i) acc += std::min(s[i], 0.0) * std::min(s[i], 0.0);
  if (psd_order > 0) {
    const Vec seg(s.begin() + nonneg_dim, s.end());
    const EigDecomposition eig = sym_eig(smat(seg));
    for (double lam : eig.eigenvalues) {
      if (lam < 0.0) acc += lam * lam;
    }
  }
  return std::sqrt(acc);
}

struct Scaling {
  Vec row;  // d, per equality row
  Vec col;  // e, per variable (uniform over the psd block)
};

Scaling ruiz_equilibrate(const SdpInstance& inst) {
  const int p = inst.eq_matrix.rows();
  const int n = inst.var_dim();
  Scaling s;
  s.row.assign(p, 1.0);
  s.col.assign(n, 1.0);
  if (p == 0) return s;
  for (int pass = 0; pass < 10; ++pass) {
    Vec row_norm(p, 0.0), col_norm(n, 0.0);
    for (int i = 0; i < p; ++i) {
      const double* r = inst.eq_matrix.row(i);
      for (int j = 0; j < n; ++j) {
        const double v = std::fabs(s.row[i] * r[j] * s.col[j]);
        row_norm[i] = std::max(row_norm[i], v);
        col_norm[j] = std::max(col_norm[j], v);
      }
    }
    // The psd block shares one factor so the cone stays invariant.
    double psd_norm = 0.0;
    for (int j = inst.nonneg_dim; j < n; ++j) psd_norm = std::max(psd_norm, col_norm[j]);
    for (int i = 0; i < p; ++i)
      if (row_norm[i] > 0.0) s.row[i] /= std::sqrt(row_norm[i]);
    for (int j = 0; j < inst.nonneg_dim; ++j)
      if (col_norm[j] > 0.0) s.col[j] /= std::sqrt(col_norm[j]);
    if (psd_norm > 0.0) {
      const double f = 1.0 / std::sqrt(psd_norm);
      for (int j = inst.nonneg_dim; j < n; ++j) s.col[j] *= f;
    }
  }
  return s;
}

}  // namespace

ConicResiduals residuals(const SdpInstance& inst, const Vec& primal, const Vec& dual) {
  inst.validate();
  if (int(primal.size()) != inst.var_dim()) throw ConfigError("residuals: primal size mismatch");
  if (int(dual.size()) != inst.eq_matrix.rows()) throw ConfigError("residuals: dual size mismatch");
  ConicResiduals r;
  const Vec az = inst.eq_matrix.rows() > 0 ? inst.eq_matrix.matvec(primal) : Vec{};
  r.primal = inst.eq_matrix.rows() > 0 ? norm2(sub(az, inst.rhs)) / (1.0 + norm2(inst.rhs)) : 0.0;
  Vec s = inst.objective;
  if (inst.eq_matrix.rows() > 0) {
    const Vec aty = inst.eq_matrix.matvec_transpose(dual);
    s = sub(s, aty);
  }
  r.dual = cone_dual_distance(s, inst.nonneg_dim, inst.psd_order) / (1.0 + norm2(inst.objective));
  const double pobj = dot(inst.objective, primal);
  const double dobj = inst.eq_matrix.rows() > 0 ? dot(inst.rhs, dual) : 0.0;
  r.gap = std::fabs(pobj - dobj) / (1.0 + std::fabs(pobj) + std::fabs(dobj));
  return r;
}

SdpSolution solve_conic(const SdpInstance& inst, const SolveOptions& opt) {
  inst.validate();
  if (!(opt.tolerance > 0.0)) throw ConfigError("solve_conic: tolerance must be positive");
  if (opt.max_iter < 1) throw ConfigError("solve_conic: max_iter must be at least 1");

  const int p = inst.eq_matrix.rows();
  const int n = inst.var_dim();
  const Scaling sc = ruiz_equilibrate(inst);

  // Scaled data applied on the fly: Abar = D A E, bbar = D b, cbar = E c.
  Vec bbar(p), cbar(n);
  for (int i = 0; i < p; ++i) bbar[i] = sc.row[i] * inst.rhs[i];
  for (int j = 0; j < n; ++j) cbar[j] = sc.col[j] * inst.objective[j];

  const auto apply_A = [&](const Vec& v) {
    Vec tmp(n);
    for (int j = 0; j < n; ++j) tmp[j] = sc.col[j] * v[j];
    Vec w = inst.eq_matrix.matvec(tmp);
    for (int i = 0; i < p; ++i) w[i] *= sc.row[i];
    return w;
  };
  const auto apply_At = [&](const Vec& y) {
    Vec tmp(p);
    for (int i = 0; i < p; ++i) tmp[i] = sc.row[i] * y[i];
    Vec w = inst.eq_matrix.matvec_transpose(tmp);
    for (int j = 0; j < n; ++j) w[j] *= sc.col[j];
    return w;
  };

  // Gram matrix of the scaled constraint rows, factored once.
  std::unique_ptr<SpdFactor> factor;
  if (p > 0) {
    SymMatrix gram(p);
    for (int i = 0; i < p; ++i) {
      const double* ri = inst.eq_matrix.row(i);
      for (int j = i; j < p; ++j) {
        const double* rj = inst.eq_matrix.row(j);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += ri[k] * rj[k] * sc.col[k] * sc.col[k];
        gram.at(i, j) = acc * sc.row[i] * sc.row[j];
      }
    }
    try {
      factor = std::make_unique<SpdFactor>(gram);
    } catch (const NumericalError&) {
      // Dependent rows: retry with a small ridge.
      const double ridge = 1e-10 * (1.0 + gram.trace() / std::max(1, p));
      for (int i = 0; i < p; ++i) gram.at(i, i) += ridge;
      factor = std::make_unique<SpdFactor>(gram);
    }
  }
  const Vec Ac = p > 0 ? apply_A(cbar) : Vec{};

  double rho = opt.rho > 0.0
                   ? opt.rho
                   : std::max(1e-6, std::min(1e6, (1.0 + norm2(cbar)) / (1.0 + norm2(bbar))));

  Vec zt(n, 0.0);  // cone-feasible iterate (scaled space)
  Vec u(n, 0.0);   // scaled consensus dual
  if (opt.warm_start && int(opt.warm_start->primal.size()) == n &&
      int(opt.warm_start->dual.size()) == p) {
    for (int j = 0; j < n; ++j) zt[j] = opt.warm_start->primal[j] / sc.col[j];
    project_cone(zt, inst.nonneg_dim, inst.psd_order);
    // u tracks -(cbar - Abar' ybar)/rho at the fixed point.
    Vec s = inst.objective;
    if (p > 0) s = sub(s, inst.eq_matrix.matvec_transpose(opt.warm_start->dual));
    for (int j = 0; j < n; ++j) u[j] = -sc.col[j] * s[j] / rho;
  }

  SdpSolution sol;
  sol.dual.assign(p, 0.0);
  Vec y(p, 0.0);
  Vec zt_prev = zt;
  std::deque<std::pair<int, double>> residual_history;

  const double alpha = opt.over_relaxation;
  int it = 0;
  for (it = 1; it <= opt.max_iter; ++it) {
    // Equality/objective step.
    Vec v(n);
    for (int j = 0; j < n; ++j) v[j] = zt[j] - u[j];
    Vec z(n);
    if (p > 0) {
      Vec av = apply_A(v);
      Vec rhs(p);
      for (int i = 0; i < p; ++i) rhs[i] = rho * (bbar[i] - av[i]) + Ac[i];
      y = factor->solve(rhs);
      const Vec aty = apply_At(y);
      for (int j = 0; j < n; ++j) z[j] = v[j] + (aty[j] - cbar[j]) / rho;
    } else {
      for (int j = 0; j < n; ++j) z[j] = v[j] - cbar[j] / rho;
    }

    // Over-relaxed cone step: zhat = alpha*z + (1-alpha)*zt;
    // zt <- proj(zhat + u); u <- u + zhat - zt.
    zt_prev = zt;
    Vec zhat(n), w(n);
    for (int j = 0; j < n; ++j) {
      zhat[j] = alpha * z[j] + (1.0 - alpha) * zt[j];
      w[j] = zhat[j] + u[j];
    }
    project_cone(w, inst.nonneg_dim, inst.psd_order);
    for (int j = 0; j < n; ++j) {
      u[j] += zhat[j] - w[j];
      zt[j] = w[j];
    }

    const bool check_now = (it % opt.check_interval == 0) || it == opt.max_iter;
    if (!check_now) continue;

    // Unscaled audit residuals.
    Vec primal(n), dual(p);
    for (int j = 0; j < n; ++j) primal[j] = sc.col[j] * zt[j];
    for (int i = 0; i < p; ++i) dual[i] = sc.row[i] * y[i];
    const ConicResiduals res = residuals(inst, primal, dual);
    const double combined = std::max({res.primal, res.dual, res.gap});

    if (!std::isfinite(combined)) {
      sol.status = SolveStatus::infeasible_suspected;
      sol.primal = std::move(primal);
      sol.dual = std::move(dual);
      sol.primal_residual = res.primal;
      sol.dual_residual = res.dual;
      sol.duality_gap = res.gap;
      sol.objective_value = dot(inst.objective, sol.primal);
      sol.iterations = it;
      return sol;
    }

    if (combined <= opt.tolerance) {
      sol.status = SolveStatus::solved;
      sol.primal = std::move(primal);
      sol.dual = std::move(dual);
      sol.primal_residual = res.primal;
      sol.dual_residual = res.dual;
      sol.duality_gap = res.gap;
      sol.objective_value = dot(inst.objective, sol.primal);
      sol.iterations = it;
      return sol;
    }

    residual_history.emplace_back(it, combined);
    while (residual_history.size() >= 2 && residual_history[1].first <= it - 1000)
      residual_history.pop_front();
    if (residual_history.front().first <= it - 1000 &&
        combined > 10.0 * residual_history.front().second && combined > 1e2) {
      sol.status = SolveStatus::infeasible_suspected;
      sol.primal = std::move(primal);
      sol.dual = std::move(dual);
      sol.primal_residual = res.primal;
      sol.dual_residual = res.dual;
      sol.duality_gap = res.gap;
      sol.objective_value = dot(inst.objective, sol.primal);
      sol.iterations = it;
      return sol;
    }

    if (opt.adaptive_rho) {
      // Balance the consensus residuals; the factorization is rho-free.
      double rp = 0.0, rd = 0.0;
      for (int j = 0; j < n; ++j) {
        rp += (z[j] - zt[j]) * (z[j] - zt[j]);
        rd += (zt[j] - zt_prev[j]) * (zt[j] - zt_prev[j]);
      }
      rp = std::sqrt(rp);
      rd = rho * std::sqrt(rd);
      double factor_rho = 1.0;
      if (rp > 10.0 * rd)
        factor_rho = 2.0;
      else if (rd > 10.0 * rp)
        factor_rho = 0.5;
      if (factor_rho != 1.0) {
        const double new_rho = std::min(1e8, std::max(1e-8, rho * factor_rho));
        if (new_rho != rho) {
          const double carry = rho / new_rho;
          for (int j = 0; j < n; ++j) u[j] *= carry;
          rho = new_rho;
        }
      }
    }
  }

  // Budget exhausted: report the last cone-feasible iterate.
  Vec primal(n), dual(p);
  for (int j = 0; j < n; ++j) primal[j] = sc.col[j] * zt[j];
  for (int i = 0; i < p; ++i) dual[i] = sc.row[i] * y[i];
  const ConicResiduals res = residuals(inst, primal, dual);
  sol.status = SolveStatus::max_iter;
  sol.primal = std::move(primal);
  sol.dual = std::move(dual);
  sol.primal_residual = res.primal;
  sol.dual_residual = res.dual;
  sol.duality_gap = res.gap;
  sol.objective_value = dot(inst.objective, sol.primal);
  sol.iterations = opt.max_iter;
  return sol;
}

// ---------------------------------------------------------------------------
// JSON round-trip (debugging format)
// ---------------------------------------------------------------------------

std::string sdp_instance_to_json(const SdpInstance& inst) {
  nlohmann::json j;
  j["objective"] = inst.objective;
  j["rows"] = inst.eq_matrix.rows();
  j["constraint_matrix"] = inst.eq_matrix.data();
  j["rhs"] = inst.rhs;
  j["cone"] = {{"nonneg", inst.nonneg_dim}, {"psd_order", inst.psd_order}};
  return j.dump(2) + "\n";
}

SdpInstance sdp_instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sdp instance: invalid JSON: ") + e.what());
  }
  try {
    SdpInstance inst;
    inst.objective = j.at("objective").get<Vec>();
    inst.rhs = j.at("rhs").get<Vec>();
    inst.nonneg_dim = j.at("cone").at("nonneg").get<int>();
    inst.psd_order = j.at("cone").at("psd_order").get<int>();
    const int rows = j.at("rows").get<int>();
    const Vec flat = j.at("constraint_matrix").get<Vec>();
    const int n = inst.var_dim();
    if (rows < 0 || int(flat.size()) != rows * n)
      throw ConfigError("sdp instance: constraint matrix size mismatch");
    inst.eq_matrix = Matrix(rows, n);
    inst.eq_matrix.data() = flat;
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sdp instance: ") + e.what());
  }
}

std::string sdp_solution_to_json(const SdpInstance& inst, const SdpSolution& sol) {
  nlohmann::json j;
  j["status"] = to_string(sol.status);
  j["objective_value"] = sol.objective_value;
  j["iterations"] = sol.iterations;
  j["primal_residual"] = sol.primal_residual;
  j["dual_residual"] = sol.dual_residual;
  j["duality_gap"] = sol.duality_gap;
  j["primal"] = sol.primal;
  j["dual"] = sol.dual;
  j["cone"] = {{"nonneg", inst.nonneg_dim}, {"psd_order", inst.psd_order}};
  return j.dump(2) + "\n";
}

}  // namespace agdcert
