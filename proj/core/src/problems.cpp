#include "agdcert/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

namespace agdcert {

namespace {

void validate_psd(const SymMatrix& q) {
  if (q.order() == 0) return;
  const EigDecomposition eig = sym_eig(q);
  const double scale = 1.0 + std::fabs(eig.eigenvalues.back());
  if (eig.eigenvalues.front() < -1e-10 * scale)
    throw ConfigError("quadratic objective: Q is not positive semidefinite (min eigenvalue " +
                      fmt_double(eig.eigenvalues.front()) + ")");
}

}  // namespace

Objective::Objective(QuadraticObjective q) : v_(std::move(q)), dim_(0) {
  const auto& qq = std::get<QuadraticObjective>(v_);
  dim_ = qq.Q.order();
  if (int(qq.q.size()) != dim_) throw ConfigError("quadratic objective: q size mismatch");
  if (!qq.Q.finite()) throw ConfigError("quadratic objective: Q has non-finite entries");
  require_finite(qq.q, "quadratic q");
  validate_psd(qq.Q);
}

Objective::Objective(LeastSquaresObjective ls) : v_(std::move(ls)), dim_(0) {
  const auto& l = std::get<LeastSquaresObjective>(v_);
  dim_ = l.A.cols();
  if (int(l.b.size()) != l.A.rows()) throw ConfigError("least_squares: b size mismatch");
  require_finite(l.A.data(), "least_squares A");
  require_finite(l.b, "least_squares b");
}

Objective::Objective(LogSumExpObjective lse) : v_(std::move(lse)), dim_(0) {
  const auto& l = std::get<LogSumExpObjective>(v_);
  dim_ = l.A.cols();
  if (int(l.b.size()) != l.A.rows()) throw ConfigError("log_sum_exp: b size mismatch");
  if (!(l.temperature > 0.0)) throw ConfigError("log_sum_exp: temperature must be positive");
  require_finite(l.A.data(), "log_sum_exp A");
  require_finite(l.b, "log_sum_exp b");
}

std::string Objective::kind() const {
  if (as_quadratic()) return "quadratic";
  if (as_least_squares()) return "least_squares";
  return "log_sum_exp";
}

double Objective::eval(const Vec& x) const {
  if (int(x.size()) != dim_) throw ConfigError("objective eval: dimension mismatch");
  if (const auto* q = as_quadratic()) {
    return 0.5 * dot(x, q->Q.matvec(x)) + dot(q->q, x);
  }
  if (const auto* ls = as_least_squares()) {
    const Vec r = sub(ls->A.matvec(x), ls->b);
    return 0.5 * dot(r, r);
  }
  const auto* lse = as_log_sum_exp();
  const Vec z = add(lse->A.matvec(x), lse->b);
  double mx = -std::numeric_limits<double>::infinity();
  for (double zi : z) mx = std::max(mx, zi / lse->temperature);
  double s = 0.0;
  for (double zi : z) s += std::exp(zi / lse->temperature - mx);
  return lse->temperature * (mx + std::log(s));
}

Vec Objective::grad(const Vec& x) const {
  if (int(x.size()) != dim_) throw ConfigError("objective grad: dimension mismatch");
  if (const auto* q = as_quadratic()) {
    Vec g = q->Q.matvec(x);
    axpy(1.0, q->q, g);
    return g;
  }
  if (const auto* ls = as_least_squares()) {
    const Vec r = sub(ls->A.matvec(x), ls->b);
    return ls->A.matvec_transpose(r);
  }
  const auto* lse = as_log_sum_exp();
  const Vec z = add(lse->A.matvec(x), lse->b);
  double mx = -std::numeric_limits<double>::infinity();
  for (double zi : z) mx = std::max(mx, zi / lse->temperature);
  Vec p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] / lse->temperature - mx);
    s += p[i];
  }
  for (double& pi : p) pi /= s;
  return lse->A.matvec_transpose(p);
}

LipschitzCert lipschitz(const Objective& obj, NormKind norm) {
  LipschitzCert cert;
  cert.norm = norm;
  if (const auto* q = obj.as_quadratic()) {
    if (norm == NormKind::euclidean) {
      cert.value = q->Q.order() == 0 ? 0.0 : std::max(0.0, sym_eig(q->Q).eigenvalues.back());
    } else {
      double m = 0.0;
      for (int i = 0; i < q->Q.order(); ++i)
        for (int j = i; j < q->Q.order(); ++j) m = std::max(m, std::fabs(q->Q.at(i, j)));
      cert.value = m;
    }
    return cert;
  }
  if (const auto* ls = obj.as_least_squares()) {
    // Hessian is A'A.
    SymMatrix ata(ls->A.cols());
    for (int i = 0; i < ls->A.cols(); ++i)
      for (int j = i; j < ls->A.cols(); ++j) {
        double s = 0.0;
        for (int r = 0; r < ls->A.rows(); ++r) s += ls->A(r, i) * ls->A(r, j);
        ata.at(i, j) = s;
      }
    if (norm == NormKind::euclidean) {
      cert.value = ata.order() == 0 ? 0.0 : std::max(0.0, sym_eig(ata).eigenvalues.back());
    } else {
      double m = 0.0;
      for (int i = 0; i < ata.order(); ++i)
        for (int j = i; j < ata.order(); ++j) m = std::max(m, std::fabs(ata.at(i, j)));
      cert.value = m;
    }
    return cert;
  }
  const auto* lse = obj.as_log_sum_exp();
  if (norm == NormKind::euclidean) {
    // Hessian is bounded by max_i |a_i|^2 / t times the identity.
    double m = 0.0;
    for (int i = 0; i < lse->A.rows(); ++i) {
      double s = 0.0;
      for (int j = 0; j < lse->A.cols(); ++j) s += lse->A(i, j) * lse->A(i, j);
      m = std::max(m, s);
    }
    cert.value = m / lse->temperature;
  } else {
    double m = 0.0;
    for (int i = 0; i < lse->A.rows(); ++i) {
      double row_max = 0.0;
      for (int j = 0; j < lse->A.cols(); ++j) row_max = std::max(row_max, std::fabs(lse->A(i, j)));
      m = std::max(m, row_max * row_max);
    }
    cert.value = m / lse->temperature;
  }
  return cert;
}

double finite_diff_check(const Objective& obj, const Vec& x, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_check: h must be positive");
  const Vec g = obj.grad(x);
  double worst = 0.0;
  Vec xp = x, xm = x;
  for (int i = 0; i < obj.dimension(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd = (obj.eval(xp) - obj.eval(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
    worst = std::max(worst, std::fabs(fd - g[i]) / std::max(1.0, std::fabs(g[i])));
  }
  return worst;
}

namespace {

bool is_diagonal(const SymMatrix& q) {
  for (int i = 0; i < q.order(); ++i)
    for (int j = i + 1; j < q.order(); ++j)
      if (q.at(i, j) != 0.0) return false;
  return true;
}

// Returns sigma if Q == sigma * I with sigma > 0, otherwise nullopt.
std::optional<double> isotropic_scale(const SymMatrix& q) {
  if (q.order() == 0 || !is_diagonal(q)) return std::nullopt;
  const double sigma = q.at(0, 0);
  if (!(sigma > 0.0)) return std::nullopt;
  for (int i = 1; i < q.order(); ++i)
    if (q.at(i, i) != sigma) return std::nullopt;
  return sigma;
}

// Minimizer of the unconstrained quadratic, handling the semidefinite case
// through the spectral pseudo-inverse. Throws when the objective is
// unbounded below.
Vec unconstrained_quadratic_minimizer(const QuadraticObjective& q) {
  const int n = q.Q.order();
  const EigDecomposition eig = sym_eig(q.Q);
  const double lam_max = n > 0 ? std::max(1.0, eig.eigenvalues.back()) : 1.0;
  Vec rhs = scaled(q.q, -1.0);
  Vec y(n, 0.0);  // coordinates in the eigenbasis
  for (int k = 0; k < n; ++k) {
    double proj = 0.0;
    for (int i = 0; i < n; ++i) proj += eig.vectors(i, k) * rhs[i];
    if (eig.eigenvalues[k] <= 1e-12 * lam_max) {
      if (std::fabs(proj) > 1e-10 * (1.0 + norm2(rhs)))
        throw ConfigError("quadratic objective is unbounded below on the whole space");
      y[k] = 0.0;
    } else {
      y[k] = proj / eig.eigenvalues[k];
    }
  }
  Vec x(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) x[i] += eig.vectors(i, k) * y[k];
  return x;
}

// Minimal accelerated run used as a fallback when no closed form applies.
// Uses the square-root step schedule with a certified stopping rule.
ReferenceOptimum long_run_optimum(const Objective& obj, const Geometry& geom) {
  const Geometry run_geom = Geometry::euclidean(geom.set);
  const auto sup_v = max_divergence(run_geom);
  if (!sup_v)
    throw ConfigError("reference_optimum: no closed form and the set is unbounded");
  const double L = std::max(lipschitz(obj, NormKind::euclidean).value, 1e-12);

  SplitMix64 rng(0x0ddba11ULL);
  Vec x = sample_feasible_interior(geom.set, rng);
  Vec x_avg = x;
  double gamma_prev = 1.0;
  constexpr int kMaxIters = 100000;
  double width = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= kMaxIters; ++k) {
    double gamma = 1.0;
    if (k > 1) {
      const double a = gamma_prev * gamma_prev;
      gamma = 2.0 * a / (a + std::sqrt(a * (a + 4.0)));
    }
    Vec x_eval(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      x_eval[i] = x_avg[i] + gamma * (x[i] - x_avg[i]);
    const Vec g = obj.grad(x_eval);
    x = bregman_prox(run_geom, g, x, L * gamma).point;
    for (std::size_t i = 0; i < x.size(); ++i) x_avg[i] += gamma * (x[i] - x_avg[i]);
    gamma_prev = gamma;
    width = 4.0 * L * (*sup_v) / double(k + 1) / double(k + 1);
    if (width <= 1e-12) break;
  }
  ReferenceOptimum ref;
  ref.point = x_avg;
  ref.value = obj.eval(x_avg);
  ref.method = ReferenceOptimum::Method::long_run;
  ref.enclosure_width = width;
  return ref;
}

}  // namespace

ReferenceOptimum reference_optimum(const Objective& obj, const Geometry& geom) {
  const FeasibleSet& set = geom.set;
  ReferenceOptimum ref;
  ref.method = ReferenceOptimum::Method::closed_form;

  if (const auto* q = obj.as_quadratic()) {
    switch (set.tag()) {
      case FeasibleSet::Tag::whole_space: {
        ref.point = unconstrained_quadratic_minimizer(*q);
        ref.value = obj.eval(ref.point);
        return ref;
      }
      case FeasibleSet::Tag::box:
        if (is_diagonal(q->Q)) {
          // Separable: clamp each coordinate's 1-d minimizer.
          const int n = obj.dimension();
          ref.point.assign(n, 0.0);
          for (int i = 0; i < n; ++i) {
            const double qi = q->Q.at(i, i);
            double t;
            if (qi > 0.0)
              t = -q->q[i] / qi;
            else if (q->q[i] > 0.0)
              t = set.lower()[i];
            else if (q->q[i] < 0.0)
              t = set.upper()[i];
            else
              t = set.lower()[i];
            ref.point[i] = std::min(std::max(t, set.lower()[i]), set.upper()[i]);
          }
          ref.value = obj.eval(ref.point);
          return ref;
        }
        break;
      case FeasibleSet::Tag::ball:
      case FeasibleSet::Tag::simplex:
        if (const auto sigma = isotropic_scale(q->Q)) {
          // 0.5*sigma*|x + q/sigma|^2 + const: project the unconstrained
          // minimizer onto the set.
          ref.point = project(set, scaled(q->q, -1.0 / *sigma));
          ref.value = obj.eval(ref.point);
          return ref;
        }
        break;
    }
  }
  if (const auto* ls = obj.as_least_squares()) {
    if (set.tag() == FeasibleSet::Tag::whole_space) {
      // Normal equations, always consistent.
      SymMatrix ata(ls->A.cols());
      for (int i = 0; i < ls->A.cols(); ++i)
        for (int j = i; j < ls->A.cols(); ++j) {
          double s = 0.0;
          for (int r = 0; r < ls->A.rows(); ++r) s += ls->A(r, i) * ls->A(r, j);
          ata.at(i, j) = s;
        }
      QuadraticObjective q{std::move(ata), scaled(ls->A.matvec_transpose(ls->b), -1.0)};
      ref.point = unconstrained_quadratic_minimizer(q);
      ref.value = obj.eval(ref.point);
      return ref;
    }
  }
  return long_run_optimum(obj, geom);
}

// ---------------------------------------------------------------------------
// JSON ingestion
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

Vec parse_vec(const json& j, const std::string& name, int expected = -1) {
  if (!j.is_array()) throw ConfigError(name + ": expected an array");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(name + ": expected numeric entries");
    v.push_back(e.get<double>());
  }
  if (expected >= 0 && int(v.size()) != expected)
    throw ConfigError(name + ": expected length " + std::to_string(expected));
  require_finite(v, name);
  return v;
}

Matrix parse_matrix(const json& j, const std::string& name, int rows, int cols) {
  const Vec flat = parse_vec(j, name, rows * cols);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = flat[std::size_t(i) * cols + c];
  return m;
}

FeasibleSet parse_set(const json& j, int dim) {
  if (!j.is_object() || !j.contains("tag")) throw ConfigError("set: expected {\"tag\": ...}");
  const std::string tag = j.at("tag").get<std::string>();
  if (tag == "whole_space") return FeasibleSet::whole_space(dim);
  if (tag == "box")
    return FeasibleSet::box(parse_vec(j.at("lower"), "set.lower", dim),
                            parse_vec(j.at("upper"), "set.upper", dim));
  if (tag == "ball") {
    if (!j.contains("radius") || !j.at("radius").is_number())
      throw ConfigError("set.radius: expected a number");
    return FeasibleSet::ball(parse_vec(j.at("center"), "set.center", dim),
                             j.at("radius").get<double>());
  }
  if (tag == "simplex") return FeasibleSet::simplex(dim);
  throw ConfigError("set.tag: unknown value '" + tag + "'");
}

json vec_to_json(const Vec& v) { return json(v); }

json matrix_to_json(const Matrix& m) { return json(m.data()); }

}  // namespace

ProblemInstance parse_problem_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem file: invalid JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dimension").get<int>();
    if (dim < 1) throw ConfigError("dimension must be positive");
    const json& data = j.at("data");

    std::optional<Objective> obj;
    if (kind == "quadratic") {
      const Matrix qfull = parse_matrix(data.at("Q"), "data.Q", dim, dim);
      obj.emplace(QuadraticObjective{SymMatrix::from_dense(qfull),
                                     parse_vec(data.at("q"), "data.q", dim)});
    } else if (kind == "least_squares") {
      const Vec b = parse_vec(data.at("b"), "data.b");
      obj.emplace(LeastSquaresObjective{
          parse_matrix(data.at("A"), "data.A", int(b.size()), dim), b});
    } else if (kind == "log_sum_exp") {
      const Vec b = parse_vec(data.at("b"), "data.b");
      if (!data.contains("temperature") || !data.at("temperature").is_number())
        throw ConfigError("data.temperature: expected a number");
      obj.emplace(LogSumExpObjective{parse_matrix(data.at("A"), "data.A", int(b.size()), dim), b,
                                     data.at("temperature").get<double>()});
    } else {
      throw ConfigError("kind: unknown objective '" + kind + "'");
    }

    FeasibleSet set = parse_set(j.at("set"), dim);
    const std::string geom_name = j.at("geometry").get<std::string>();
    Geometry geom = [&]() {
      if (geom_name == "euclidean") return Geometry::euclidean(std::move(set));
      if (geom_name == "entropy") return Geometry::entropy(std::move(set));
      throw ConfigError("geometry: expected 'euclidean' or 'entropy'");
    }();

    ProblemInstance p{std::move(*obj), std::move(geom), parse_vec(j.at("x0"), "x0", dim),
                      j.value("name", std::string())};
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem file: ") + e.what());
  }
}

ProblemInstance load_problem_file(const std::string& path) {
  return parse_problem_json(read_text_file(path));
}

std::string problem_to_json(const ProblemInstance& p) {
  json j;
  j["kind"] = p.objective.kind();
  j["dimension"] = p.objective.dimension();
  json data;
  if (const auto* q = p.objective.as_quadratic()) {
    data["Q"] = matrix_to_json(q->Q.to_dense());
    data["q"] = vec_to_json(q->q);
  } else if (const auto* ls = p.objective.as_least_squares()) {
    data["A"] = matrix_to_json(ls->A);
    data["b"] = vec_to_json(ls->b);
  } else if (const auto* lse = p.objective.as_log_sum_exp()) {
    data["A"] = matrix_to_json(lse->A);
    data["b"] = vec_to_json(lse->b);
    data["temperature"] = lse->temperature;
  }
  j["data"] = std::move(data);

  json set;
  const FeasibleSet& s = p.geometry.set;
  set["tag"] = s.describe();
  if (s.tag() == FeasibleSet::Tag::box) {
    set["lower"] = vec_to_json(s.lower());
    set["upper"] = vec_to_json(s.upper());
  } else if (s.tag() == FeasibleSet::Tag::ball) {
    set["center"] = vec_to_json(s.center());
    set["radius"] = s.radius();
  }
  j["set"] = std::move(set);
  j["geometry"] =
      p.geometry.dgf == Geometry::Dgf::negative_entropy ? "entropy" : "euclidean";
  j["x0"] = vec_to_json(p.x0);
  if (!p.name.empty()) j["name"] = p.name;
  return j.dump(2) + "\n";
}

}  // namespace agdcert
