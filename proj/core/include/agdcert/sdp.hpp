#pragma once

#include <string>

#include "agdcert/linalg.hpp"

namespace agdcert {

// Small dense conic program in standard form:
//   minimize   <objective, z>
//   subject to eq_matrix * z = rhs,
//              z[0:nonneg_dim] >= 0,
//              smat(z[nonneg_dim:]) positive semidefinite.
struct SdpInstance {
  Vec objective;
  Matrix eq_matrix;  // may have zero rows
  Vec rhs;
  int nonneg_dim = 0;
  int psd_order = 0;

  int var_dim() const { return nonneg_dim + psd_order * (psd_order + 1) / 2; }
  void validate() const;
};

enum class SolveStatus { solved, max_iter, infeasible_suspected };

std::string to_string(SolveStatus s);

struct SdpSolution {
  Vec primal;
  Vec dual;  // one multiplier per equality row
  double objective_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
};

struct SolveOptions {
  double tolerance = 1e-7;   // accepted range [1e-9, 1e-4] widened to 1e-7 default
  int max_iter = 200000;
  double over_relaxation = 1.5;
  int check_interval = 25;
  // Initial step weight; auto-scaled from the data when unset (<= 0).
  double rho = 0.0;
  bool adaptive_rho = true;
  const SdpSolution* warm_start = nullptr;
};

// Operator-splitting solve: alternates an equality-constrained quadratic
// step (cached SPD factorization of A*A') with a projection onto the cone,
// with over-relaxation and diagonal (Ruiz) equilibration of the data.
SdpSolution solve_conic(const SdpInstance& instance, const SolveOptions& options = {});

struct ConicResiduals {
  double primal = 0.0;  // ||A z - b|| / (1 + ||b||)
  double dual = 0.0;    // dist_{K*}(c - A'y) / (1 + ||c||)
  double gap = 0.0;     // |c'z - b'y| / (1 + |c'z| + |b'y|)
};

// Pure recomputation from the instance data; usable as an independent audit
// of any claimed primal/dual pair.
ConicResiduals residuals(const SdpInstance& instance, const Vec& primal, const Vec& dual);

std::string sdp_instance_to_json(const SdpInstance& instance);
SdpInstance sdp_instance_from_json(const std::string& json_text);
std::string sdp_solution_to_json(const SdpInstance& instance, const SdpSolution& solution);

}  // namespace agdcert
