#include "agdcert/linalg.hpp"

#include <cmath>

#include <doctest.h>

#include "testutil.hpp"

using namespace agdcert;

TEST_CASE("sym_eig diagonal matrix") {
  SymMatrix a(2);
  a.at(0, 0) = 2.0;
  a.at(1, 1) = 3.0;
  const EigDecomposition e = sym_eig(a);
  CHECK(e.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::fabs(e.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::fabs(e.vectors(1, 1)) == doctest::Approx(1.0));
  CHECK(std::fabs(e.vectors(1, 0)) == doctest::Approx(0.0));
}

TEST_CASE("sym_eig 2x2 off-diagonal") {
  SymMatrix a(2);
  a.at(0, 1) = 1.0;
  const EigDecomposition e = sym_eig(a);
  CHECK(e.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sym_eig recovers a constructed spectrum") {
  const int n = 8;
  const Matrix q = testutil::random_orthogonal(n, 81);
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = -3.0 + i * 1.25;
  const SymMatrix a = testutil::spectral_assemble(q, d);
  const EigDecomposition e = sym_eig(a);
  for (int i = 0; i < n; ++i) CHECK(e.eigenvalues[i] == doctest::Approx(d[i]).epsilon(1e-9));
}

TEST_CASE("sym_eig invariants: reconstruction, orthonormality, trace") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 11ULL}) {
    const int n = 6;
    const SymMatrix a = testutil::random_sym(n, seed, 2.0);
    const EigDecomposition e = sym_eig(a);
    // Ascending order.
    for (int i = 1; i < n; ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i - 1]);
    // ||Q L Q' - A||_F <= 1e-10 (1 + ||A||_F).
    double recon_err = 0.0, qtq_err = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0, qq = 0.0;
        for (int k = 0; k < n; ++k) {
          s += e.vectors(i, k) * e.eigenvalues[k] * e.vectors(j, k);
          qq += e.vectors(k, i) * e.vectors(k, j);
        }
        recon_err += (s - a.at(i, j)) * (s - a.at(i, j));
        const double target = i == j ? 1.0 : 0.0;
        qtq_err = std::max(qtq_err, std::fabs(qq - target));
      }
    CHECK(std::sqrt(recon_err) <= 1e-10 * (1.0 + a.frobenius_norm()));
    CHECK(qtq_err <= 1e-10);
    double eig_sum = 0.0;
    for (double lam : e.eigenvalues) eig_sum += lam;
    CHECK(eig_sum == doctest::Approx(a.trace()).epsilon(1e-10));
  }
}

TEST_CASE("psd_project clips negative directions") {
  SUBCASE("already psd is untouched") {
    SymMatrix a(2);
    a.at(0, 0) = 1.0;
    a.at(1, 1) = 2.0;
    const SymMatrix p = psd_project(a);
    CHECK(p.at(0, 0) == 1.0);
    CHECK(p.at(1, 1) == 2.0);
    CHECK(p.at(0, 1) == 0.0);
  }
  SUBCASE("symmetric flip matrix") {
    SymMatrix a(2);
    a.at(0, 1) = 1.0;
    const SymMatrix p = psd_project(a);
    CHECK(p.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p.at(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p.at(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("fully negative clips to zero") {
    SymMatrix a(1);
    a.at(0, 0) = -3.0;
    CHECK(psd_project(a).at(0, 0) == 0.0);
  }
  SUBCASE("projection is psd and idempotent on random inputs") {
    for (std::uint64_t seed : {5ULL, 6ULL, 7ULL}) {
      const SymMatrix a = testutil::random_sym(7, seed);
      const SymMatrix p = psd_project(a);
      const EigDecomposition e = sym_eig(p);
      CHECK(e.eigenvalues.front() >= -1e-10);
      const SymMatrix pp = psd_project(p);
      double diff = 0.0;
      for (std::size_t i = 0; i < p.packed().size(); ++i)
        diff = std::max(diff, std::fabs(pp.packed()[i] - p.packed()[i]));
      CHECK(diff <= 1e-12 * (1.0 + p.frobenius_norm()));
    }
  }
}

TEST_CASE("svec and smat") {
  SUBCASE("identity has unscaled diagonal") {
    const Vec v = svec(SymMatrix::identity(2));
    CHECK(v == Vec{1.0, 0.0, 1.0});
  }
  SUBCASE("off-diagonal picks up sqrt(2)") {
    SymMatrix a(2);
    a.at(0, 1) = 1.0;
    const Vec v = svec(a);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-16));
    CHECK(v[2] == 0.0);
  }
  SUBCASE("inner product matches trace(AB)") {
    for (std::uint64_t seed : {21ULL, 22ULL, 23ULL}) {
      const SymMatrix a = testutil::random_sym(5, seed);
      const SymMatrix b = testutil::random_sym(5, seed + 100);
      double tr = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) tr += a.at(i, k) * b.at(k, i);
      CHECK(dot(svec(a), svec(b)) == doctest::Approx(tr).epsilon(1e-12));
    }
  }
  SUBCASE("round-trip recovers the matrix to a ulp") {
    // The sqrt(2) scale-and-undo is not always bitwise exact in IEEE
    // arithmetic; one ulp is the attainable contract.
    const SymMatrix a = testutil::random_sym(6, 33);
    const SymMatrix b = smat(svec(a));
    for (std::size_t i = 0; i < a.packed().size(); ++i)
      CHECK(b.packed()[i] == doctest::Approx(a.packed()[i]).epsilon(3e-16));
  }
  SUBCASE("smat rejects non-triangular lengths") {
    CHECK_THROWS_AS(smat(Vec{1.0, 2.0, 3.0, 4.0}), ConfigError);
  }
}

TEST_CASE("solve_spd") {
  SUBCASE("identity") {
    const Vec b{1.0, -2.0, 3.0};
    CHECK(solve_spd(SymMatrix::identity(3), b) == b);
  }
  SUBCASE("diagonal by hand") {
    SymMatrix a(2);
    a.at(0, 0) = 2.0;
    a.at(1, 1) = 4.0;
    const Vec x = solve_spd(a, {2.0, 8.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
  }
  SUBCASE("construct-then-solve recovers the solution") {
    const int n = 9;
    const SymMatrix a = testutil::random_spd(n, 99);
    SplitMix64 rng(7);
    Vec x0(n);
    for (double& v : x0) v = rng.normal();
    const Vec b = a.matvec(x0);
    const Vec x = solve_spd(a, b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x0[i]).epsilon(1e-8));
    const Vec resid = sub(a.matvec(x), b);
    CHECK(norm2(resid) <= 1e-9 * (1.0 + norm2(b)));
  }
  SUBCASE("indefinite matrix is rejected") {
    SymMatrix a(2);
    a.at(0, 0) = 1.0;
    a.at(1, 1) = -1.0;
    CHECK_THROWS_AS(solve_spd(a, {1.0, 1.0}), NumericalError);
  }
}
