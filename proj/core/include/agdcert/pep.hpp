#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agdcert/agd.hpp"
#include "agdcert/sdp.hpp"

namespace agdcert {

// A point appearing in the worst-case analysis: a prox iterate x_k, an
// averaged iterate xbar_k, a gradient-evaluation point xunder_k, or the
// minimizer xstar.
struct PointLabel {
  enum class Kind { x, x_avg, x_eval, x_star };
  Kind kind = Kind::x;
  int index = 0;

  std::string name() const;
  bool operator==(const PointLabel&) const = default;
};

PointLabel parse_point_label(const std::string& name);

// One distinct point after merging labels with identical affine expansions
// over the basis {x_0..x_N, xstar}. labels[0] is the canonical name.
struct PepPoint {
  std::vector<PointLabel> labels;
  Vec coeff;  // length N+2; last slot is the xstar coordinate
};

struct PointSet {
  int n = 0;
  bool merged = true;
  std::vector<PepPoint> points;

  int size() const { return int(points.size()); }
  int index_of(const PointLabel& label) const;  // -1 when absent
  int x_index(int k) const { return index_of({PointLabel::Kind::x, k}); }
  int star_index() const { return index_of({PointLabel::Kind::x_star, 0}); }
};

// Unrolls the averaging recursions in coefficient space and (optionally)
// merges duplicate points. With gamma_1 = 1 the merges are
// xbar_0 = x_0, xunder_1 = x_0, xbar_1 = x_1, xunder_2 = x_1.
PointSet build_points(const Schedule& sched, int n, bool merge_duplicates = true);

struct CatalogueEntry {
  enum class Family {
    lower_interp,  // 1/(2L)||g_v - g_v'||^2 <= f(v) - f(v') - <g_v', v - v'>
    upper_smooth,  // f(v) - f(v') - <g_v', v - v'> <= L/2 ||v - v'||^2
    prox_opt,      // <g_k + eta_k (x_k - x_{k-1}), x_k - w> <= 0
    radius         // ||x_0 - xstar||^2 <= R^2
  };
  Family family = Family::radius;
  int v = -1;       // first point (lower_interp/upper_smooth)
  int vprime = -1;  // point carrying the gradient (lower_interp/upper_smooth)
  int step = 0;     // prox step (prox_opt)
  int w = -1;       // reference point (prox_opt)
};

std::string to_string(CatalogueEntry::Family f);

struct Catalogue {
  std::vector<CatalogueEntry> entries;  // radius entry last
  int radius_index() const { return int(entries.size()) - 1; }
  int find(const CatalogueEntry& like) const;  // match by family and indices
};

// All ordered interpolation pairs over distinct points, the prox optimality
// entries over k = 1..N and every reference point except x_k itself (that
// pairing is the zero form and is dropped), and one radius entry.
Catalogue build_catalogue(const PointSet& points, const Schedule& sched);

enum class PepMode { general, fixed, conjecture };
PepMode pep_mode_from_string(const std::string& s);
std::string to_string(PepMode mode);

struct PepInstance {
  Schedule schedule;
  int n = 0;
  double lipschitz = 1.0;
  double radius = 1.0;
  PointSet points;
  Catalogue catalogue;

  // Gram basis: x_k - xstar for k = 0..N, then one gradient per point.
  int gram_dim() const { return n + 1 + points.size(); }

  // Quadratic form of a catalogue entry over the Gram basis.
  SymMatrix entry_quadratic(const CatalogueEntry& e) const;
  // Function-value coefficients of an entry as (point index, value) pairs.
  std::vector<std::pair<int, double>> entry_fcoef(const CatalogueEntry& e) const;
  // +1 on the class of xunder_N, -1 on xstar.
  Vec fvalue_target() const;
};

PepInstance make_pep_instance(const std::string& schedule_name, int n, double lipschitz,
                              double radius, bool merge_duplicates = true);

struct PepAssemblyOptions {
  // Orientation of the fixed interpolation weights on consecutive
  // gradient-evaluation points: true places the gradient on the later point,
  // which is the only orientation that closes the value-matching rows.
  bool gradient_at_later_point = true;
};

struct PepAssembly {
  SdpInstance sdp;
  std::vector<int> free_entries;  // catalogue index per nonnegative variable
  Vec fixed_weights;              // full catalogue length, zero on free entries
  int fvalue_rows = 0;
};

PepAssembly assemble_sdp(const PepInstance& inst, PepMode mode,
                         const PepAssemblyOptions& aopt = {});

struct PepCertificate {
  PepMode mode = PepMode::general;
  int n = 0;
  std::string schedule_name;
  double lipschitz = 1.0;
  double radius = 1.0;
  Vec weights;  // one per catalogue entry except the radius entry
  double d = 0.0;
  double linear_residual = 0.0;
  double min_eigenvalue = 0.0;
  bool verified = false;
  SolveStatus solve_status = SolveStatus::max_iter;
  int iterations = 0;
  double solve_seconds = 0.0;
};

struct VerifyResult {
  double linear_residual = 0.0;
  double min_eigenvalue = 0.0;
  bool verified = false;
};

// Solver-independent audit: rebuilds the value-matching residual and the
// aggregated matrix from the catalogue definition and checks nonnegativity
// of the weights, the residual and the minimum eigenvalue.
VerifyResult verify_certificate(const PepInstance& inst, const Vec& weights, double d);

PepCertificate solve_pep(const PepInstance& inst, PepMode mode, const SolveOptions& sopt = {},
                         const PepCertificate* warm = nullptr,
                         const PepAssemblyOptions& aopt = {});

struct SweepOptions {
  std::string schedule_name = "s1";
  double lipschitz = 1.0;
  double radius = 1.0;
  SolveOptions solver;
  int threads = 1;
  bool warm_start = false;  // serializes rows of equal mode across N
  // Invoked (serialized) for each successfully solved row.
  std::function<void(const PepInstance&, const PepCertificate&)> on_certificate;
};

struct SweepRow {
  int n = 0;
  PepMode mode = PepMode::general;
  double d = 0.0;
  double linear_residual = 0.0;
  double min_eigenvalue = 0.0;
  double solve_seconds = 0.0;
  bool verified = false;
  std::string status;
  std::string error;  // nonempty when the row failed outright
};

std::vector<SweepRow> pep_sweep(int n_min, int n_max, const std::vector<PepMode>& modes,
                                const SweepOptions& opt);

// CSV columns: N, mode, d, d_scaled_by_N_sq, linear_residual, min_eig,
// solve_seconds, verified.
std::string sweep_csv(const std::vector<SweepRow>& rows, bool include_timing);

std::string certificate_to_json(const PepInstance& inst, const PepCertificate& cert,
                                bool include_timing);
// Rebuilds the instance named inside the JSON and re-maps the stored weights
// onto its catalogue.
std::pair<PepInstance, PepCertificate> certificate_from_json(const std::string& text);

// Solved prox-inequality weights at the minimizer for the fixed mode, scaled
// by N(N+1): entry (k-1, N-n_min) holds the weight of step k at horizon N.
// Cells with k > N are NaN.
Matrix fixed_weight_table(int n_min, int n_max, const SweepOptions& opt);

}  // namespace agdcert
