#pragma once
// Finite unitary truncations of half-line and extended CMV matrices.

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "cmvsub/coeffs.hpp"

namespace cmv {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

// Any failure of the LAPACK layer (singular solve, non-converged Schur form).
class BackendError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EigenSolverError : public BackendError {
public:
  EigenSolverError(const std::string& what, double residual)
      : BackendError(what), residual(residual) {}
  double residual;
};

// Theta(a) = [[conj a, rho], [rho, -a]]; unitary for |a| <= 1.
Mat2 theta_block(cplx a);

// Square matrix with at most two sub- and two super-diagonals.
class BandedMatrix {
public:
  static constexpr int kBand = 2;

  explicit BandedMatrix(long n = 0) : n_(n), d_(std::size_t(n) * (2 * kBand + 1)) {}

  long size() const { return n_; }
  bool in_band(long i, long j) const { return std::abs(i - j) <= kBand; }
  cplx operator()(long i, long j) const {
    return in_band(i, j) ? d_[slot(i, j)] : cplx{};
  }
  cplx& at(long i, long j) { return d_[slot(i, j)]; }

  Eigen::MatrixXcd dense() const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  BandedMatrix operator*(const BandedMatrix& o) const;  // result must stay in band
  BandedMatrix adjoint() const;
  // max |(U U*)_{ij} - delta_ij|
  double unitarity_residual() const;

private:
  std::size_t slot(long i, long j) const { return std::size_t(i) * (2 * kBand + 1) + (j - i + kBand); }
  long n_;
  std::vector<cplx> d_;
};

enum class Flavor { HalfLinePlus, HalfLineMinus, Extended };

struct TruncatedOperator {
  long n_min = 0, n_max = 0;  // row k of `matrix` is lattice index n_min + k
  BandedMatrix matrix;
  cplx phase_left = 1.0, phase_right = 1.0;  // alpha_{n_min-1}, alpha_{n_max}
  Flavor flavor = Flavor::Extended;

  long dim() const { return n_max - n_min + 1; }
  long row(long n) const { return n - n_min; }
};

struct SpectralMeasureSample {
  std::vector<double> eigenangles;  // in [0, 2 pi)
  std::vector<double> weights;
  std::vector<long> anchors;  // lattice indices
  double residual = 0;        // off-diagonal mass of the Schur form

  double mass() const;
  // sum_k w_k (zeta_k + z)/(zeta_k - z)
  cplx borel(cplx z) const;
};

TruncatedOperator build_half_line_plus(const CoefficientSource& s, long N, cplx boundary_phase = 1.0);
TruncatedOperator build_extended(const CoefficientSource& s, long n_min, long n_max,
                                 cplx phase_left = 1.0, cplx phase_right = 1.0);

struct LMFactors {
  BandedMatrix L, M;
};
// Window [n_min, n_max] must have n_min even and n_max odd so that L splits
// into whole Theta blocks; M carries the cut phases at both ends.
LMFactors lm_factorize(const CoefficientSource& s, long n_min, long n_max,
                       cplx phase_left = 1.0, cplx phase_right = 1.0);

SpectralMeasureSample spectral_measure(const TruncatedOperator& op, const std::vector<long>& anchors,
                                       double tol = 1e-9);

// <delta_n, (U + z)(U - z)^{-1} delta_n> by a banded LU solve.
cplx borel_diagonal(const TruncatedOperator& op, long n, cplx z);
// G_nn = <delta_n, (U - z)^{-1} delta_n> for several n with one factorization.
std::vector<cplx> resolvent_diagonal(const TruncatedOperator& op, const std::vector<long>& ns, cplx z);

// "row col re im" per stored entry, lattice indices.
void dump(const TruncatedOperator& op, std::ostream& os);

}  // namespace cmv
