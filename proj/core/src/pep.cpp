#include "agdcert/pep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace agdcert {

std::string PointLabel::name() const {
  switch (kind) {
    case Kind::x:
      return "x_" + std::to_string(index);
    case Kind::x_avg:
      return "xbar_" + std::to_string(index);
    case Kind::x_eval:
      return "xunder_" + std::to_string(index);
    case Kind::x_star:
      return "xstar";
  }
  return "?";
}

PointLabel parse_point_label(const std::string& name) {
  if (name == "xstar") return {PointLabel::Kind::x_star, 0};
  const auto parse_tail = [&](const std::string& prefix) {
    return std::stoi(name.substr(prefix.size()));
  };
  try {
    if (name.rfind("xbar_", 0) == 0) return {PointLabel::Kind::x_avg, parse_tail("xbar_")};
    if (name.rfind("xunder_", 0) == 0) return {PointLabel::Kind::x_eval, parse_tail("xunder_")};
    if (name.rfind("x_", 0) == 0) return {PointLabel::Kind::x, parse_tail("x_")};
  } catch (const std::exception&) {
  }
  throw ConfigError("unknown point label '" + name + "'");
}

int PointSet::index_of(const PointLabel& label) const {
  for (int i = 0; i < size(); ++i)
    for (const PointLabel& l : points[i].labels)
      if (l == label) return i;
  return -1;
}

PointSet build_points(const Schedule& sched, int n, bool merge_duplicates) {
  if (n < 2) throw ConfigError("build_points: needs at least 2 steps");
  if (n > sched.horizon()) throw ConfigError("build_points: schedule horizon too short");
  PointSet set;
  set.n = n;
  set.merged = merge_duplicates;
  const int width = n + 2;

  // Raw affine expansions, by label, over {x_0..x_n, xstar}.
  std::vector<Vec> avg_coeff(n + 1, Vec(width, 0.0));
  avg_coeff[0][0] = 1.0;
  std::vector<Vec> eval_coeff(n + 1, Vec(width, 0.0));
  for (int k = 1; k <= n; ++k) {
    const double g = sched.gamma(k);
    const double omg = 1.0 - g;
    for (int j = 0; j < width; ++j) {
      eval_coeff[k][j] = omg * avg_coeff[k - 1][j];
      avg_coeff[k][j] = omg * avg_coeff[k - 1][j];
    }
    eval_coeff[k][k - 1] += g;
    avg_coeff[k][k] += g;
  }

  const auto add_point = [&](const PointLabel& label, const Vec& coeff) {
    if (merge_duplicates) {
      for (auto& p : set.points) {
        double diff = 0.0;
        for (int j = 0; j < width; ++j) diff = std::max(diff, std::fabs(p.coeff[j] - coeff[j]));
        if (diff <= 1e-12) {
          p.labels.push_back(label);
          return;
        }
      }
    }
    set.points.push_back(PepPoint{{label}, coeff});
  };

  for (int k = 0; k <= n; ++k) {
    Vec c(width, 0.0);
    c[k] = 1.0;
    add_point({PointLabel::Kind::x, k}, c);
  }
  for (int k = 0; k <= n; ++k) add_point({PointLabel::Kind::x_avg, k}, avg_coeff[k]);
  for (int k = 1; k <= n; ++k) add_point({PointLabel::Kind::x_eval, k}, eval_coeff[k]);
  Vec star(width, 0.0);
  star[width - 1] = 1.0;
  add_point({PointLabel::Kind::x_star, 0}, star);
  return set;
}

std::string to_string(CatalogueEntry::Family f) {
  switch (f) {
    case CatalogueEntry::Family::lower_interp:
      return "lower_interp";
    case CatalogueEntry::Family::upper_smooth:
      return "upper_smooth";
    case CatalogueEntry::Family::prox_opt:
      return "prox_opt";
    case CatalogueEntry::Family::radius:
      return "radius";
  }
  return "?";
}

int Catalogue::find(const CatalogueEntry& like) const {
  for (int i = 0; i < int(entries.size()); ++i) {
    const CatalogueEntry& e = entries[i];
    if (e.family == like.family && e.v == like.v && e.vprime == like.vprime &&
        e.step == like.step && e.w == like.w)
      return i;
  }
  return -1;
}

Catalogue build_catalogue(const PointSet& points, const Schedule& sched) {
  Catalogue cat;
  const int P = points.size();
  for (int v = 0; v < P; ++v)
    for (int vp = 0; vp < P; ++vp)
      if (v != vp)
        cat.entries.push_back({CatalogueEntry::Family::lower_interp, v, vp, 0, -1});
  for (int v = 0; v < P; ++v)
    for (int vp = 0; vp < P; ++vp)
      if (v != vp)
        cat.entries.push_back({CatalogueEntry::Family::upper_smooth, v, vp, 0, -1});
  for (int k = 1; k <= points.n; ++k) {
    (void)sched;
    for (int j = 0; j <= points.n; ++j) {
      const int w = points.x_index(j);
      if (j == k) continue;  // zero form
      cat.entries.push_back({CatalogueEntry::Family::prox_opt, -1, -1, k, w});
    }
    cat.entries.push_back({CatalogueEntry::Family::prox_opt, -1, -1, k, points.star_index()});
  }
  cat.entries.push_back({CatalogueEntry::Family::radius, -1, -1, 0, -1});
  return cat;
}

PepMode pep_mode_from_string(const std::string& s) {
  if (s == "general") return PepMode::general;
  if (s == "fixed") return PepMode::fixed;
  if (s == "conjecture") return PepMode::conjecture;
  throw ConfigError("unknown pep mode '" + s + "'");
}

std::string to_string(PepMode mode) {
  switch (mode) {
    case PepMode::general:
      return "general";
    case PepMode::fixed:
      return "fixed";
    case PepMode::conjecture:
      return "conjecture";
  }
  return "?";
}

SymMatrix PepInstance::entry_quadratic(const CatalogueEntry& e) const {
  const int m = gram_dim();
  const int pos_dim = n + 1;
  SymMatrix Mq(m);
  const auto grad_index = [&](int point) { return pos_dim + point; };
  const auto pos_coeff = [&](int point, int j) { return points.points[point].coeff[j]; };

  switch (e.family) {
    case CatalogueEntry::Family::lower_interp: {
      const int gv = grad_index(e.v), gp = grad_index(e.vprime);
      const double h = 1.0 / (2.0 * lipschitz);
      Mq.at(gv, gv) += h;
      Mq.at(gp, gp) += h;
      Mq.at(gv, gp) -= h;
      for (int j = 0; j < pos_dim; ++j) {
        const double dj = pos_coeff(e.v, j) - pos_coeff(e.vprime, j);
        if (dj != 0.0) Mq.at(gp, j) += 0.5 * dj;
      }
      break;
    }
    case CatalogueEntry::Family::upper_smooth: {
      const int gp = grad_index(e.vprime);
      Vec delta(pos_dim);
      for (int j = 0; j < pos_dim; ++j)
        delta[j] = pos_coeff(e.v, j) - pos_coeff(e.vprime, j);
      for (int j = 0; j < pos_dim; ++j)
        if (delta[j] != 0.0) Mq.at(gp, j) -= 0.5 * delta[j];
      for (int i = 0; i < pos_dim; ++i) {
        if (delta[i] == 0.0) continue;
        for (int j = i; j < pos_dim; ++j)
          Mq.at(i, j) -= 0.5 * lipschitz * delta[i] * delta[j];
      }
      break;
    }
    case CatalogueEntry::Family::prox_opt: {
      const int k = e.step;
      const int geval = grad_index(points.index_of({PointLabel::Kind::x_eval, k}));
      Vec d2(pos_dim, 0.0);  // x_k - w
      d2[k] += 1.0;
      for (int j = 0; j < pos_dim; ++j) d2[j] -= pos_coeff(e.w, j);
      for (int j = 0; j < pos_dim; ++j)
        if (d2[j] != 0.0) Mq.at(geval, j) += 0.5 * d2[j];
      Vec d1(pos_dim, 0.0);  // x_k - x_{k-1}
      d1[k] = 1.0;
      d1[k - 1] -= 1.0;
      const double eta = schedule.eta(k);
      for (int i = 0; i < pos_dim; ++i)
        for (int j = i; j < pos_dim; ++j) {
          const double v = 0.5 * eta * (d1[i] * d2[j] + d1[j] * d2[i]);
          if (v != 0.0) Mq.at(i, j) += v;
        }
      break;
    }
    case CatalogueEntry::Family::radius:
      Mq.at(0, 0) += 1.0;
      break;
  }
  return Mq;
}

std::vector<std::pair<int, double>> PepInstance::entry_fcoef(const CatalogueEntry& e) const {
  switch (e.family) {
    case CatalogueEntry::Family::lower_interp:
      return {{e.v, -1.0}, {e.vprime, 1.0}};
    case CatalogueEntry::Family::upper_smooth:
      return {{e.v, 1.0}, {e.vprime, -1.0}};
    default:
      return {};
  }
}

Vec PepInstance::fvalue_target() const {
  Vec t(points.size(), 0.0);
  t[points.index_of({PointLabel::Kind::x_eval, n})] += 1.0;
  t[points.star_index()] -= 1.0;
  return t;
}

PepInstance make_pep_instance(const std::string& schedule_name, int n, double lipschitz,
                              double radius, bool merge_duplicates) {
  if (n < 2) throw ConfigError("pep: n must be at least 2");
  if (!(radius > 0.0)) throw ConfigError("pep: radius must be positive");
  PepInstance inst;
  inst.schedule = Schedule::make(schedule_name, lipschitz, n);
  inst.n = n;
  inst.lipschitz = lipschitz;
  inst.radius = radius;
  inst.points = build_points(inst.schedule, n, merge_duplicates);
  inst.catalogue = build_catalogue(inst.points, inst.schedule);
  return inst;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

// Weight patterns for the fixed and conjecture modes (valid for s1 only).
Vec fixed_pattern_weights(const PepInstance& inst, PepMode mode,
                          const PepAssemblyOptions& aopt) {
  const int n = inst.n;
  Vec w(inst.catalogue.entries.size(), 0.0);
  const double denom = double(n) * (n + 1);
  const int star = inst.points.star_index();
  const auto eval_idx = [&](int k) {
    return inst.points.index_of({PointLabel::Kind::x_eval, k});
  };

  for (int k = 2; k <= n; ++k) {
    CatalogueEntry like{CatalogueEntry::Family::lower_interp, eval_idx(k - 1), eval_idx(k), 0, -1};
    if (!aopt.gradient_at_later_point) std::swap(like.v, like.vprime);
    const int idx = inst.catalogue.find(like);
    if (idx < 0) throw NumericalError("fixed pattern: missing interpolation entry");
    w[idx] += double(k) * (k - 1) / denom;
  }
  for (int k = 1; k <= n; ++k) {
    CatalogueEntry like{CatalogueEntry::Family::lower_interp, star, eval_idx(k), 0, -1};
    if (!aopt.gradient_at_later_point) std::swap(like.v, like.vprime);
    const int idx = inst.catalogue.find(like);
    if (idx < 0) throw NumericalError("fixed pattern: missing star entry");
    w[idx] += 2.0 * k / denom;
  }

  if (mode == PepMode::conjecture) {
    for (int k = 1; k <= n; ++k) {
      double ck = 0.0;
      if (k <= n - 2)
        ck = 2.0 * k / denom;
      else if (k == n - 1)
        ck = (4.0 * n - 2.0) / denom;
      const int idx = inst.catalogue.find(
          {CatalogueEntry::Family::prox_opt, -1, -1, k, star});
      if (idx < 0) throw NumericalError("fixed pattern: missing prox entry");
      w[idx] = ck;
    }
  }
  return w;
}

}  // namespace

PepAssembly assemble_sdp(const PepInstance& inst, PepMode mode,
                         const PepAssemblyOptions& aopt) {
  if (mode != PepMode::general && inst.schedule.name() != "s1")
    throw ConfigError("pep: fixed and conjecture modes support only the s1 schedule");

  PepAssembly out;
  const auto& entries = inst.catalogue.entries;
  const int n_entries = int(entries.size());
  const int radius_entry = inst.catalogue.radius_index();
  out.fixed_weights.assign(n_entries, 0.0);

  if (mode == PepMode::general) {
    for (int i = 0; i < n_entries; ++i) out.free_entries.push_back(i);
  } else {
    out.fixed_weights = fixed_pattern_weights(inst, mode, aopt);
    if (mode == PepMode::fixed) {
      const int star = inst.points.star_index();
      for (int i = 0; i < n_entries; ++i) {
        const CatalogueEntry& e = entries[i];
        if (e.family == CatalogueEntry::Family::prox_opt && e.w == star)
          out.free_entries.push_back(i);
      }
    }
    out.free_entries.push_back(radius_entry);
  }

  const int n_points = inst.points.size();
  const int star = inst.points.star_index();
  const Vec target = inst.fvalue_target();

  // The value-matching rows sum to zero across points, so the star row is
  // implied by the others and dropped to keep the row set independent.
  std::vector<int> frows;
  if (mode == PepMode::general) {
    for (int p = 0; p < n_points; ++p)
      if (p != star) frows.push_back(p);
  } else {
    // All interpolation weights are fixed: the value match must already hold.
    Vec acc(n_points, 0.0);
    for (int i = 0; i < n_entries; ++i) {
      if (out.fixed_weights[i] == 0.0) continue;
      for (const auto& [p, c] : inst.entry_fcoef(entries[i])) acc[p] += out.fixed_weights[i] * c;
    }
    double worst = 0.0;
    for (int p = 0; p < n_points; ++p) worst = std::max(worst, std::fabs(acc[p] - target[p]));
    if (worst > 1e-9)
      throw NumericalError("pep assembly: fixed weights break the value match by " +
                           fmt_double(worst));
  }
  out.fvalue_rows = int(frows.size());

  const int m = inst.gram_dim();
  const int svec_dim = m * (m + 1) / 2;
  const int n_free = int(out.free_entries.size());
  const int n_var = n_free + svec_dim;
  const int n_rows = out.fvalue_rows + svec_dim;

  SdpInstance sdp;
  sdp.nonneg_dim = n_free;
  sdp.psd_order = m;
  sdp.objective.assign(n_var, 0.0);
  sdp.rhs.assign(n_rows, 0.0);
  sdp.eq_matrix = Matrix(n_rows, n_var);

  // Objective: minimize the radius-entry weight.
  for (int j = 0; j < n_free; ++j)
    if (out.free_entries[j] == radius_entry) sdp.objective[j] = 1.0;

  // Column per free entry.
  for (int j = 0; j < n_free; ++j) {
    const CatalogueEntry& e = entries[out.free_entries[j]];
    for (const auto& [p, c] : inst.entry_fcoef(e)) {
      const auto it = std::lower_bound(frows.begin(), frows.end(), p);
      if (it != frows.end() && *it == p) sdp.eq_matrix(int(it - frows.begin()), j) = c;
    }
    const Vec col = svec(inst.entry_quadratic(e));
    for (int s = 0; s < svec_dim; ++s) sdp.eq_matrix(out.fvalue_rows + s, j) = col[s];
  }
  // Slack block: -I on the svec rows.
  for (int s = 0; s < svec_dim; ++s) sdp.eq_matrix(out.fvalue_rows + s, n_free + s) = -1.0;

  // Right-hand side: value-match target and -svec of the fixed aggregate.
  for (int r = 0; r < out.fvalue_rows; ++r) sdp.rhs[r] = target[frows[r]];
  SymMatrix fixed_agg(m);
  for (int i = 0; i < n_entries; ++i)
    if (out.fixed_weights[i] != 0.0)
      fixed_agg.add_scaled(inst.entry_quadratic(entries[i]), out.fixed_weights[i]);
  const Vec fixed_svec = svec(fixed_agg);
  for (int s = 0; s < svec_dim; ++s) sdp.rhs[out.fvalue_rows + s] = -fixed_svec[s];

  out.sdp = std::move(sdp);
  return out;
}

// ---------------------------------------------------------------------------
// Verification and solving
// ---------------------------------------------------------------------------

VerifyResult verify_certificate(const PepInstance& inst, const Vec& weights, double d) {
  const auto& entries = inst.catalogue.entries;
  const int radius_entry = inst.catalogue.radius_index();
  if (int(weights.size()) != radius_entry)
    throw ConfigError("verify_certificate: weight vector length mismatch");

  VerifyResult res;
  Vec acc(inst.points.size(), 0.0);
  bool weights_ok = d >= -1e-10;
  SymMatrix agg(inst.gram_dim());
  for (int i = 0; i < radius_entry; ++i) {
    const double wi = weights[i];
    if (wi < -1e-10) weights_ok = false;
    if (wi == 0.0) continue;
    for (const auto& [p, c] : inst.entry_fcoef(entries[i])) acc[p] += wi * c;
    agg.add_scaled(inst.entry_quadratic(entries[i]), wi);
  }
  agg.add_scaled(inst.entry_quadratic(entries[radius_entry]), d);

  const Vec target = inst.fvalue_target();
  for (int p = 0; p < inst.points.size(); ++p)
    res.linear_residual = std::max(res.linear_residual, std::fabs(acc[p] - target[p]));
  res.min_eigenvalue = sym_eig(agg).eigenvalues.front();
  res.verified =
      weights_ok && res.linear_residual <= 1e-7 && res.min_eigenvalue >= -1e-7;
  return res;
}

namespace {

std::string entry_key(const PepInstance& inst, const CatalogueEntry& e) {
  const auto pname = [&](int p) {
    return p >= 0 ? inst.points.points[p].labels.front().name() : std::string("-");
  };
  return to_string(e.family) + "|" + pname(e.v) + "|" + pname(e.vprime) + "|" +
         std::to_string(e.step) + "|" + pname(e.w);
}

}  // namespace

PepCertificate solve_pep(const PepInstance& inst, PepMode mode, const SolveOptions& sopt,
                         const PepCertificate* warm, const PepAssemblyOptions& aopt) {
  const auto t0 = std::chrono::steady_clock::now();
  PepAssembly asmb = assemble_sdp(inst, mode, aopt);

  SolveOptions local = sopt;
  SdpSolution warm_solution;
  if (warm != nullptr) {
    // Map the previous certificate's weights onto this catalogue by label.
    PepInstance prev = make_pep_instance(warm->schedule_name, warm->n, warm->lipschitz,
                                         warm->radius, true);
    std::unordered_map<std::string, double> prev_weights;
    for (int i = 0; i < prev.catalogue.radius_index(); ++i)
      prev_weights[entry_key(prev, prev.catalogue.entries[i])] = warm->weights[i];

    const int n_free = int(asmb.free_entries.size());
    const int m = inst.gram_dim();
    Vec primal(n_free + m * (m + 1) / 2, 0.0);
    SymMatrix agg(m);
    for (int i = 0; i < int(inst.catalogue.entries.size()); ++i)
      if (asmb.fixed_weights[i] != 0.0)
        agg.add_scaled(inst.entry_quadratic(inst.catalogue.entries[i]), asmb.fixed_weights[i]);
    for (int j = 0; j < n_free; ++j) {
      const int ei = asmb.free_entries[j];
      const CatalogueEntry& e = inst.catalogue.entries[ei];
      double w0 = 0.0;
      if (e.family == CatalogueEntry::Family::radius) {
        w0 = warm->d;
      } else {
        const auto it = prev_weights.find(entry_key(inst, e));
        if (it != prev_weights.end()) w0 = std::max(0.0, it->second);
      }
      primal[j] = w0;
      if (w0 != 0.0) agg.add_scaled(inst.entry_quadratic(e), w0);
    }
    const Vec s = svec(psd_project(agg));
    std::copy(s.begin(), s.end(), primal.begin() + n_free);
    warm_solution.primal = std::move(primal);
    warm_solution.dual.assign(asmb.sdp.eq_matrix.rows(), 0.0);
    local.warm_start = &warm_solution;
  }

  const SdpSolution sol = solve_conic(asmb.sdp, local);

  PepCertificate cert;
  cert.mode = mode;
  cert.n = inst.n;
  cert.schedule_name = inst.schedule.name();
  cert.lipschitz = inst.lipschitz;
  cert.radius = inst.radius;
  cert.solve_status = sol.status;
  cert.iterations = sol.iterations;

  const int radius_entry = inst.catalogue.radius_index();
  cert.weights = asmb.fixed_weights;
  cert.weights.resize(radius_entry);  // radius entry reported separately as d
  for (int j = 0; j < int(asmb.free_entries.size()); ++j) {
    const int ei = asmb.free_entries[j];
    const double w = std::max(0.0, sol.primal[j]);
    if (ei == radius_entry)
      cert.d = w;
    else
      cert.weights[ei] = w;
  }

  const VerifyResult vr = verify_certificate(inst, cert.weights, cert.d);
  cert.linear_residual = vr.linear_residual;
  cert.min_eigenvalue = vr.min_eigenvalue;
  cert.verified = vr.verified && sol.status == SolveStatus::solved;
  cert.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sol.status != SolveStatus::solved)
    throw NumericalError("pep solve did not converge: status " + to_string(sol.status) +
                         ", primal " + fmt_double(sol.primal_residual) + ", dual " +
                         fmt_double(sol.dual_residual) + ", gap " +
                         fmt_double(sol.duality_gap));
  return cert;
}

// ---------------------------------------------------------------------------
// Sweep, table and serialization
// ---------------------------------------------------------------------------

std::vector<SweepRow> pep_sweep(int n_min, int n_max, const std::vector<PepMode>& modes,
                                const SweepOptions& opt) {
  if (n_min < 3 || n_max < n_min || n_max > 25)
    throw ConfigError("pep sweep: need 3 <= n_min <= n_max <= 25");
  struct Task {
    int n;
    PepMode mode;
  };
  std::vector<Task> tasks;
  for (int n = n_min; n <= n_max; ++n)
    for (PepMode m : modes) tasks.push_back({n, m});

  std::vector<SweepRow> rows(tasks.size());
  std::mutex sink_mutex;
  const auto run_task = [&](std::size_t idx, const PepCertificate* warm) {
    const Task& t = tasks[idx];
    SweepRow row;
    row.n = t.n;
    row.mode = t.mode;
    std::optional<PepCertificate> cert;
    try {
      const PepInstance inst =
          make_pep_instance(opt.schedule_name, t.n, opt.lipschitz, opt.radius, true);
      cert = solve_pep(inst, t.mode, opt.solver, warm);
      row.d = cert->d;
      row.linear_residual = cert->linear_residual;
      row.min_eigenvalue = cert->min_eigenvalue;
      row.solve_seconds = cert->solve_seconds;
      row.verified = cert->verified;
      row.status = to_string(cert->solve_status);
      if (opt.on_certificate) {
        const std::lock_guard<std::mutex> lock(sink_mutex);
        opt.on_certificate(inst, *cert);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      row.status = "error";
    }
    rows[idx] = std::move(row);
    return cert;
  };

  if (opt.threads <= 1) {
    std::map<PepMode, PepCertificate> last_by_mode;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const PepCertificate* warm = nullptr;
      const auto it = last_by_mode.find(tasks[i].mode);
      if (opt.warm_start && it != last_by_mode.end()) warm = &it->second;
      auto cert = run_task(i, warm);
      if (opt.warm_start && cert) last_by_mode[tasks[i].mode] = std::move(*cert);
    }
  } else {
    std::atomic<std::size_t> next{0};
    const int workers = std::min<int>(opt.threads, int(tasks.size()));
    std::vector<std::future<void>> futs;
    futs.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          run_task(i, nullptr);
        }
      }));
    }
    for (auto& f : futs) f.get();
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.n != b.n) return a.n < b.n;
    return int(a.mode) < int(b.mode);
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool include_timing) {
  CsvWriter csv({"N", "mode", "d", "d_scaled_by_N_sq", "linear_residual", "min_eig",
                 "solve_seconds", "verified"});
  for (const SweepRow& r : rows) {
    csv.add_row({std::to_string(r.n), to_string(r.mode), fmt_double(r.d),
                 fmt_double(r.d * r.n * r.n), fmt_double(r.linear_residual),
                 fmt_double(r.min_eigenvalue),
                 fmt_double(include_timing ? r.solve_seconds : 0.0),
                 r.error.empty() ? (r.verified ? "true" : "false") : "error"});
  }
  return csv.str();
}

std::string certificate_to_json(const PepInstance& inst, const PepCertificate& cert,
                                bool include_timing) {
  nlohmann::json j;
  j["mode"] = to_string(cert.mode);
  j["n"] = cert.n;
  j["schedule"] = cert.schedule_name;
  j["lipschitz"] = cert.lipschitz;
  j["radius"] = cert.radius;
  j["d"] = cert.d;
  j["bound"] = cert.d * cert.radius * cert.radius;
  j["linear_residual"] = cert.linear_residual;
  j["min_eigenvalue"] = cert.min_eigenvalue;
  j["verified"] = cert.verified;
  j["solve"] = {{"status", to_string(cert.solve_status)},
                {"iterations", cert.iterations},
                {"seconds", include_timing ? cert.solve_seconds : 0.0}};

  nlohmann::json merged = nlohmann::json::object();
  for (const auto& p : inst.points.points)
    for (std::size_t i = 1; i < p.labels.size(); ++i)
      merged[p.labels[i].name()] = p.labels.front().name();
  j["merged_points"] = std::move(merged);

  const auto pname = [&](int p) {
    return p >= 0 ? inst.points.points[p].labels.front().name() : std::string();
  };
  nlohmann::json weights = nlohmann::json::array();
  for (int i = 0; i < inst.catalogue.radius_index(); ++i) {
    const CatalogueEntry& e = inst.catalogue.entries[i];
    if (cert.weights[i] == 0.0) continue;
    nlohmann::json entry;
    entry["family"] = to_string(e.family);
    if (e.family == CatalogueEntry::Family::prox_opt) {
      entry["step"] = e.step;
      entry["w"] = pname(e.w);
    } else {
      entry["v"] = pname(e.v);
      entry["vprime"] = pname(e.vprime);
    }
    entry["value"] = cert.weights[i];
    weights.push_back(std::move(entry));
  }
  j["weights"] = std::move(weights);
  return j.dump(2) + "\n";
}

std::pair<PepInstance, PepCertificate> certificate_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("certificate: invalid JSON: ") + e.what());
  }
  try {
    PepCertificate cert;
    cert.mode = pep_mode_from_string(j.at("mode").get<std::string>());
    cert.n = j.at("n").get<int>();
    cert.schedule_name = j.at("schedule").get<std::string>();
    cert.lipschitz = j.at("lipschitz").get<double>();
    cert.radius = j.at("radius").get<double>();
    cert.d = j.at("d").get<double>();

    PepInstance inst =
        make_pep_instance(cert.schedule_name, cert.n, cert.lipschitz, cert.radius, true);
    cert.weights.assign(inst.catalogue.radius_index(), 0.0);
    for (const auto& entry : j.at("weights")) {
      CatalogueEntry like;
      const std::string family = entry.at("family").get<std::string>();
      if (family == "prox_opt") {
        like.family = CatalogueEntry::Family::prox_opt;
        like.step = entry.at("step").get<int>();
        like.w = inst.points.index_of(parse_point_label(entry.at("w").get<std::string>()));
      } else if (family == "lower_interp" || family == "upper_smooth") {
        like.family = family == "lower_interp" ? CatalogueEntry::Family::lower_interp
                                               : CatalogueEntry::Family::upper_smooth;
        like.v = inst.points.index_of(parse_point_label(entry.at("v").get<std::string>()));
        like.vprime =
            inst.points.index_of(parse_point_label(entry.at("vprime").get<std::string>()));
      } else {
        throw ConfigError("certificate: unknown weight family '" + family + "'");
      }
      const int idx = inst.catalogue.find(like);
      if (idx < 0 || idx >= inst.catalogue.radius_index())
        throw ConfigError("certificate: weight does not match any catalogue entry");
      cert.weights[idx] = entry.at("value").get<double>();
    }
    return {std::move(inst), std::move(cert)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("certificate: ") + e.what());
  }
}

Matrix fixed_weight_table(int n_min, int n_max, const SweepOptions& opt) {
  if (n_min < 3 || n_max < n_min) throw ConfigError("fixed_weight_table: bad range");
  Matrix table(n_max, n_max - n_min + 1);
  for (auto& v : table.data()) v = std::numeric_limits<double>::quiet_NaN();
  for (int n = n_min; n <= n_max; ++n) {
    const PepInstance inst = make_pep_instance(opt.schedule_name, n, opt.lipschitz, opt.radius);
    const PepCertificate cert = solve_pep(inst, PepMode::fixed, opt.solver);
    const int star = inst.points.star_index();
    for (int k = 1; k <= n; ++k) {
      const int idx =
          inst.catalogue.find({CatalogueEntry::Family::prox_opt, -1, -1, k, star});
      table(k - 1, n - n_min) = cert.weights[idx] * double(n) * (n + 1);
    }
  }
  return table;
}

}  // namespace agdcert
