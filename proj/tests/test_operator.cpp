#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cmvsub/operator.hpp"
#include "doctest.h"

using namespace cmv;
using Eigen::MatrixXcd;

namespace {

// L (even blocks) and M (odd blocks) placed entry by entry from Theta(a) = [[a*, rho], [rho, -a]];
// the block for index k acts on rows/cols (k, k+1) and is clipped at the window edges.
std::pair<MatrixXcd, MatrixXcd> dense_lm(const CoefficientSource& s, long lo, long hi, cplx pl, cplx pr) {
  const long d = hi - lo + 1;
  MatrixXcd L = MatrixXcd::Zero(d, d), M = MatrixXcd::Zero(d, d);
  for (long k = lo - 1; k <= hi; ++k) {
    cplx a = k == lo - 1 ? pl : k == hi ? pr : s.alpha(k);
    double rho = std::sqrt(std::max(0.0, 1 - std::norm(a)));
    MatrixXcd& T = (((k % 2) + 2) % 2 == 0) ? L : M;
    long i = k - lo;
    if (i >= 0) T(i, i) = std::conj(a);
    if (i + 1 < d) T(i + 1, i + 1) = -a;
    if (i >= 0 && i + 1 < d) T(i, i + 1) = T(i + 1, i) = rho;
  }
  return {L, M};
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("theta block is unitary") {
  Mat2 t = theta_block({0.6, 0.3});
  CHECK(max_abs(t * t.adjoint() - Mat2::Identity()) < 1e-14);
  CHECK(t(0, 0) == cplx(0.6, -0.3));
  CHECK(t(1, 1) == cplx(-0.6, -0.3));
  CHECK(t(0, 1).real() == doctest::Approx(std::sqrt(1 - 0.45)));
}

TEST_CASE("half-line free truncation pattern") {
  auto op = build_half_line_plus(free_source(), 2, 1.0);
  CHECK(op.dim() == 3);
  MatrixXcd C = op.matrix.dense();
  CHECK(C(0, 0) == cplx{});
  CHECK(C(1, 0) == cplx{1});
  CHECK(C(2, 0) == cplx{});
  CHECK(op.matrix.unitarity_residual() < 1e-12);
  CHECK_THROWS(build_half_line_plus(free_source(), 1, 1.0));
}

TEST_CASE("half-line truncation matches the Theta-block product") {
  const CoefficientSource s = RandomIID{7, 0.9};
  const cplx ph = std::polar(1.0, 0.7);
  auto op = build_half_line_plus(s, 64, ph);
  CHECK(op.matrix.unitarity_residual() < 1e-12);
  auto [L, M] = dense_lm(s, 0, 64, -1.0, ph);
  CHECK(max_abs(op.matrix.dense() - L * M) < 1e-14);
}

TEST_CASE("extended truncation: free entries, unitarity, eCMV agreement") {
  auto f = build_extended(free_source(), -4, 4);
  MatrixXcd E = f.matrix.dense();
  long r0 = f.row(0);
  int ones = 0;
  for (long j = 0; j < f.dim(); ++j) {
    if (std::abs(E(r0, j)) > 1e-15) {
      CHECK(std::abs(E(r0, j) - 1.0) < 1e-15);
      ++ones;
    }
  }
  CHECK(ones == 1);  // rho_{-1} rho_0 is the only nonzero in the free row 0

  const CoefficientSource s = RandomIID{3, 0.5};
  auto e = build_extended(s, -128, 128);
  CHECK(e.matrix.unitarity_residual() < 1e-12);
  auto [L, M] = dense_lm(s, -128, 128, 1.0, 1.0);
  CHECK(max_abs(e.matrix.dense() - L * M) < 1e-14);

  const cplx pl = std::polar(1.0, 2.0), pr = std::polar(1.0, -1.0);
  auto g = build_extended(s, -33, 40, pl, pr);
  auto [L2, M2] = dense_lm(s, -33, 40, pl, pr);
  CHECK(max_abs(g.matrix.dense() - L2 * M2) < 1e-14);
  CHECK(g.matrix.unitarity_residual() < 1e-12);

  CHECK_THROWS(build_extended(s, 0, 10));
  CHECK_THROWS(build_extended(s, -3, 1));
}

TEST_CASE("LM factorization") {
  auto f = lm_factorize(free_source(), -4, 5);
  MatrixXcd L = f.L.dense();
  for (long i = 0; i < L.rows(); i += 2) {
    CHECK(L(i, i + 1) == cplx{1});
    CHECK(L(i + 1, i) == cplx{1});
    CHECK(L(i, i) == cplx{});
  }
  const CoefficientSource s = RandomIID{21, 0.8};
  auto lm = lm_factorize(s, -32, 33);
  auto e = build_extended(s, -32, 33);
  CHECK(max_abs((lm.L * lm.M).dense() - e.matrix.dense()) < 1e-13);
  CHECK(lm.L.unitarity_residual() < 1e-13);
  CHECK(lm.M.unitarity_residual() < 1e-13);
  CHECK_THROWS(lm_factorize(s, -31, 33));
  CHECK_THROWS(lm_factorize(s, -32, 32));
}

TEST_CASE("banded product refuses to leave the band") {
  auto e = build_extended(RandomIID{1, 0.5}, -8, 9);
  CHECK_THROWS(e.matrix * e.matrix);
}

TEST_CASE("spectral measure: free truncations") {
  auto op = build_half_line_plus(free_source(), 31, 1.0);
  auto m = spectral_measure(op, {0});
  REQUIRE(m.eigenangles.size() == 32);
  auto th = m.eigenangles;
  std::sort(th.begin(), th.end());
  for (std::size_t k = 1; k < th.size(); ++k) CHECK(th[k] - th[k - 1] > 1e-3);
  CHECK(th.front() >= 0.0);
  CHECK(th.back() < 2 * std::numbers::pi);
  for (double w : m.weights) CHECK(std::abs(w - 1.0 / 32) < 1e-12);
  CHECK(std::abs(m.mass() - 1.0) < 1e-10);

  CHECK(std::abs(spectral_measure(build_half_line_plus(free_source(), 15), {0}).mass() - 1) < 1e-10);
  CHECK(std::abs(spectral_measure(build_extended(free_source(), -16, 17), {0, 1}).mass() - 2) < 1e-10);
}

TEST_CASE("spectral measure agrees with an independent eigensolver") {
  const CoefficientSource s = RandomIID{12, 0.7};
  auto op = build_extended(s, -40, 41);
  auto m = spectral_measure(op, {0, 1});
  Eigen::ComplexEigenSolver<MatrixXcd> es(op.matrix.dense());
  // Compare Borel transforms: independent of eigenvalue ordering.
  for (cplx z : {cplx{0.3, 0.2}, std::polar(0.9, 2.0), std::polar(0.99, -1.0)}) {
    cplx ref = 0;
    for (long k = 0; k < op.dim(); ++k) {
      cplx zeta = es.eigenvalues()(k);
      double w = std::norm(es.eigenvectors()(op.row(0), k)) + std::norm(es.eigenvectors()(op.row(1), k));
      ref += w * (zeta + z) / (zeta - z);
    }
    CHECK(std::abs(m.borel(z) - ref) < 1e-10);
    // banded solve versus the dense sum
    cplx banded = borel_diagonal(op, 0, z) + borel_diagonal(op, 1, z);
    CHECK(std::abs(banded - m.borel(z)) < 1e-12 * std::max(1.0, std::abs(banded)));
  }
  CHECK(m.residual < 1e-9);
}

TEST_CASE("resolvent diagonal matches a dense inverse") {
  auto op = build_half_line_plus(RandomIID{4, 0.6}, 50, std::polar(1.0, 0.4));
  cplx z = std::polar(0.8, 1.1);
  MatrixXcd G = (op.matrix.dense() - z * MatrixXcd::Identity(op.dim(), op.dim())).inverse();
  auto g = resolvent_diagonal(op, {0, 1, 25}, z);
  CHECK(std::abs(g[0] - G(0, 0)) < 1e-12);
  CHECK(std::abs(g[1] - G(1, 1)) < 1e-12);
  CHECK(std::abs(g[2] - G(25, 25)) < 1e-12);
}

TEST_CASE("spectral weights of a fixed arc stabilize as the window grows") {
  // Arc weight of delta_0 under two boundary phases: the gap shrinks as N doubles.
  const CoefficientSource s = Constant{0.3};
  auto arc = [&](long N, cplx ph) {
    auto m = spectral_measure(build_half_line_plus(s, N, ph), {0});
    double w = 0;
    for (std::size_t k = 0; k < m.weights.size(); ++k)
      if (m.eigenangles[k] > 1.5 && m.eigenangles[k] < 2.5) w += m.weights[k];
    return w;
  };
  double prev = 1;
  for (long N : {64L, 128L, 256L}) {
    double d = std::abs(arc(N, 1.0) - arc(N, -1.0));
    CHECK(d <= prev);
    CHECK(d < 4.0 / double(N));
    prev = d;
  }
}

TEST_CASE("dump writes one tuple per stored entry") {
  auto op = build_extended(free_source(), -2, 3);
  std::ostringstream os;
  dump(op, os);
  std::istringstream is(os.str());
  long r, c;
  double re, im;
  int lines = 0;
  bool found = false;
  while (is >> r >> c >> re >> im) {
    ++lines;
    CHECK(r >= -2);
    CHECK(c <= 3);
    if (r == 0 && std::abs(re - 1) < 1e-15) found = true;
  }
  CHECK(lines > 0);
  CHECK(found);
}
