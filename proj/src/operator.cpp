#include "cmvsub/operator.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace cmv {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

lapack_complex_double* lp(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

// Theta(alpha_k) on rows (k, k+1), clipped to [a, b]; even k -> L, odd k -> M.
// Clipping only drops the rho entries of the unimodular cut blocks, which vanish.
template <class AlphaAt>
LMFactors theta_sums(long a, long b, AlphaAt alpha_at) {
  LMFactors f{BandedMatrix(b - a + 1), BandedMatrix(b - a + 1)};
  for (long k = a - 1; k <= b; ++k) {
    BandedMatrix& X = (k % 2 == 0) ? f.L : f.M;
    Mat2 t = theta_block(alpha_at(k));
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        long i = k + r, j = k + c;
        if (i >= a && i <= b && j >= a && j <= b) X.at(i - a, j - a) = t(r, c);
      }
  }
  return f;
}

LMFactors window_factors(const CoefficientSource& s, long a, long b, cplx pl, cplx pr) {
  return theta_sums(a, b, [&](long k) -> cplx {
    if (k == a - 1) return pl;
    if (k == b) return pr;
    return s.alpha(k);
  });
}

void check_phase(cplx p, const char* what) {
  if (std::abs(std::abs(p) - 1.0) > 1e-14)
    throw std::invalid_argument(std::string(what) + " must be unimodular");
}

}  // namespace

Mat2 theta_block(cplx a) {
  double rho = Verblunsky::of(a).rho;
  Mat2 t;
  t << std::conj(a), rho, rho, -a;
  return t;
}

Eigen::MatrixXcd BandedMatrix::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
  for (long i = 0; i < n_; ++i)
    for (long j = std::max(0L, i - kBand); j <= std::min(n_ - 1, i + kBand); ++j) m(i, j) = (*this)(i, j);
  return m;
}

Eigen::VectorXcd BandedMatrix::apply(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n_);
  for (long i = 0; i < n_; ++i)
    for (long j = std::max(0L, i - kBand); j <= std::min(n_ - 1, i + kBand); ++j) y(i) += (*this)(i, j) * x(j);
  return y;
}

BandedMatrix BandedMatrix::operator*(const BandedMatrix& o) const {
  BandedMatrix p(n_);
  for (long i = 0; i < n_; ++i)
    for (long k = std::max(0L, i - kBand); k <= std::min(n_ - 1, i + kBand); ++k) {
      cplx a = (*this)(i, k);
      if (a == cplx{}) continue;
      for (long j = std::max(0L, k - kBand); j <= std::min(n_ - 1, k + kBand); ++j) {
        cplx b = o(k, j);
        if (b == cplx{}) continue;
        if (!in_band(i, j)) throw std::logic_error("banded product leaves the band");
        p.at(i, j) += a * b;
      }
    }
  return p;
}

BandedMatrix BandedMatrix::adjoint() const {
  BandedMatrix a(n_);
  for (long i = 0; i < n_; ++i)
    for (long j = std::max(0L, i - kBand); j <= std::min(n_ - 1, i + kBand); ++j)
      a.at(j, i) = std::conj((*this)(i, j));
  return a;
}

double BandedMatrix::unitarity_residual() const {
  double worst = 0;
  for (long i = 0; i < n_; ++i)
    for (long j = std::max(0L, i - 2 * kBand); j <= std::min(n_ - 1, i + 2 * kBand); ++j) {
      cplx s = 0;
      for (long k = std::max(std::max(0L, i - kBand), j - kBand); k <= std::min(std::min(n_ - 1, i + kBand), j + kBand); ++k)
        s += (*this)(i, k) * std::conj((*this)(j, k));
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

double SpectralMeasureSample::mass() const {
  double m = 0;
  for (double w : weights) m += w;
  return m;
}

cplx SpectralMeasureSample::borel(cplx z) const {
  cplx f = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cplx zeta = std::polar(1.0, eigenangles[k]);
    f += weights[k] * (zeta + z) / (zeta - z);
  }
  return f;
}

TruncatedOperator build_half_line_plus(const CoefficientSource& s, long N, cplx boundary_phase) {
  if (N < 2) throw std::invalid_argument("build_half_line_plus: N must be >= 2");
  check_phase(boundary_phase, "boundary_phase");
  // alpha_{-1} = -1 turns the leading M block into the scalar 1.
  LMFactors f = window_factors(s, 0, N, -1.0, boundary_phase);
  TruncatedOperator op;
  op.n_min = 0;
  op.n_max = N;
  op.matrix = f.L * f.M;
  op.phase_left = -1.0;
  op.phase_right = boundary_phase;
  op.flavor = Flavor::HalfLinePlus;
  return op;
}

TruncatedOperator build_extended(const CoefficientSource& s, long n_min, long n_max, cplx phase_left,
                                 cplx phase_right) {
  if (!(n_min < 0 && n_max > 1))
    throw std::invalid_argument("build_extended: window must contain rows 0 and 1 with n_min < 0");
  check_phase(phase_left, "phase_left");
  check_phase(phase_right, "phase_right");
  LMFactors f = window_factors(s, n_min, n_max, phase_left, phase_right);
  TruncatedOperator op;
  op.n_min = n_min;
  op.n_max = n_max;
  op.matrix = f.L * f.M;
  op.phase_left = phase_left;
  op.phase_right = phase_right;
  op.flavor = Flavor::Extended;
  return op;
}

LMFactors lm_factorize(const CoefficientSource& s, long n_min, long n_max, cplx phase_left, cplx phase_right) {
  if (n_min % 2 != 0 || n_max % 2 == 0 || n_max <= n_min)
    throw std::invalid_argument("lm_factorize: window must start at an even and end at an odd index");
  check_phase(phase_left, "phase_left");
  check_phase(phase_right, "phase_right");
  return window_factors(s, n_min, n_max, phase_left, phase_right);
}

SpectralMeasureSample spectral_measure(const TruncatedOperator& op, const std::vector<long>& anchors, double tol) {
  const long n = op.dim();
  double ures = op.matrix.unitarity_residual();
  if (ures > 1e-10) throw std::invalid_argument("spectral_measure: operator is not unitary");
  for (long a : anchors)
    if (a < op.n_min || a > op.n_max) throw std::invalid_argument("spectral_measure: anchor outside window");

  Eigen::MatrixXcd A = op.matrix.dense();  // column-major
  Eigen::VectorXcd w(n);
  Eigen::MatrixXcd Z(n, n);
  lapack_int sdim = 0;
  lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, lapack_int(n), lp(A.data()), lapack_int(n),
                                  &sdim, lp(w.data()), lp(Z.data()), lapack_int(n));
  if (info != 0) throw EigenSolverError("zgees failed with info " + std::to_string(info), INFINITY);

  // Normal matrix: the Schur form is diagonal and Z holds eigenvectors.
  double off = 0;
  for (long j = 0; j < n; ++j)
    for (long i = 0; i < j; ++i) off = std::max(off, std::abs(A(i, j)));
  if (off > tol) throw EigenSolverError("Schur form not diagonal: residual " + std::to_string(off), off);

  SpectralMeasureSample m;
  m.anchors = anchors;
  m.residual = off;
  m.eigenangles.resize(n);
  m.weights.assign(n, 0.0);
  for (long k = 0; k < n; ++k) {
    double t = std::arg(w(k));
    if (t < 0) t += kTwoPi;
    m.eigenangles[k] = t < kTwoPi ? t : 0.0;  // -0 wraps onto 2 pi
    for (long a : anchors) m.weights[k] += std::norm(Z(op.row(a), k));
  }
  return m;
}

std::vector<cplx> resolvent_diagonal(const TruncatedOperator& op, const std::vector<long>& ns, cplx z) {
  const lapack_int n = lapack_int(op.dim()), kl = 2, ku = 2, ldab = 2 * kl + ku + 1;
  const lapack_int nrhs = lapack_int(ns.size());
  std::vector<cplx> ab(std::size_t(ldab) * n);
  for (lapack_int j = 0; j < n; ++j)
    for (lapack_int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i)
      ab[std::size_t(kl + ku + i - j) + std::size_t(j) * ldab] = op.matrix(i, j) - (i == j ? z : cplx{});
  std::vector<cplx> b(std::size_t(n) * nrhs);
  for (lapack_int c = 0; c < nrhs; ++c) {
    if (ns[c] < op.n_min || ns[c] > op.n_max) throw std::invalid_argument("resolvent_diagonal: index outside window");
    b[std::size_t(op.row(ns[c])) + std::size_t(c) * n] = 1.0;
  }
  std::vector<lapack_int> ipiv(n);
  lapack_int info = LAPACKE_zgbsv(LAPACK_COL_MAJOR, n, kl, ku, nrhs, lp(ab.data()), ldab, ipiv.data(), lp(b.data()), n);
  if (info != 0) throw BackendError("zgbsv failed with info " + std::to_string(info));
  std::vector<cplx> g(nrhs);
  for (lapack_int c = 0; c < nrhs; ++c) g[c] = b[std::size_t(op.row(ns[c])) + std::size_t(c) * n];
  return g;
}

cplx borel_diagonal(const TruncatedOperator& op, long n, cplx z) {
  return 1.0 + 2.0 * z * resolvent_diagonal(op, {n}, z)[0];
}

void dump(const TruncatedOperator& op, std::ostream& os) {
  auto prec = os.precision(17);
  const long d = op.dim();
  for (long i = 0; i < d; ++i)
    for (long j = std::max(0L, i - 2); j <= std::min(d - 1, i + 2); ++j) {
      cplx v = op.matrix(i, j);
      if (v == cplx{}) continue;
      os << op.n_min + i << ' ' << op.n_min + j << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
  os.precision(prec);
}

}  // namespace cmv
