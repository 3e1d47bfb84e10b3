#pragma once

#include <string>
#include <variant>

#include "agdcert/geometry.hpp"
#include "agdcert/linalg.hpp"

namespace agdcert {

// f(x) = 0.5 x'Qx + q'x with Q positive semidefinite.
struct QuadraticObjective {
  SymMatrix Q;
  Vec q;
};

// f(x) = 0.5 ||Ax - b||_2^2.
struct LeastSquaresObjective {
  Matrix A;
  Vec b;
};

// f(x) = t * log(sum_i exp((<a_i, x> + b_i) / t)).
struct LogSumExpObjective {
  Matrix A;
  Vec b;
  double temperature = 1.0;
};

class Objective {
 public:
  explicit Objective(QuadraticObjective q);
  explicit Objective(LeastSquaresObjective ls);
  explicit Objective(LogSumExpObjective lse);

  int dimension() const { return dim_; }
  std::string kind() const;

  double eval(const Vec& x) const;
  Vec grad(const Vec& x) const;

  const QuadraticObjective* as_quadratic() const {
    return std::get_if<QuadraticObjective>(&v_);
  }
  const LeastSquaresObjective* as_least_squares() const {
    return std::get_if<LeastSquaresObjective>(&v_);
  }
  const LogSumExpObjective* as_log_sum_exp() const {
    return std::get_if<LogSumExpObjective>(&v_);
  }

 private:
  std::variant<QuadraticObjective, LeastSquaresObjective, LogSumExpObjective> v_;
  int dim_ = 0;
};

// A certified upper bound on the gradient-Lipschitz constant of the instance
// between the given norm and its dual.
struct LipschitzCert {
  NormKind norm = NormKind::euclidean;
  double value = 0.0;
};

LipschitzCert lipschitz(const Objective& obj, NormKind norm);

// Max relative error of the analytic gradient against central differences.
double finite_diff_check(const Objective& obj, const Vec& x, double h);

struct ReferenceOptimum {
  Vec point;
  double value = 0.0;
  enum class Method { closed_form, long_run } method = Method::closed_form;
  // Certified enclosure: the true optimum lies in [value - width, value].
  double enclosure_width = 0.0;
};

// Closed forms where the structure admits them (unconstrained SPD quadratics,
// diagonal quadratics over boxes, isotropic quadratics over balls and the
// simplex); otherwise a long accelerated run with a certified stopping rule.
ReferenceOptimum reference_optimum(const Objective& obj, const Geometry& geom);

// A problem instance as ingested from JSON.
struct ProblemInstance {
  Objective objective;
  Geometry geometry;
  Vec x0;
  std::string name;
};

ProblemInstance parse_problem_json(const std::string& json_text);
ProblemInstance load_problem_file(const std::string& path);
std::string problem_to_json(const ProblemInstance& p);

}  // namespace agdcert
