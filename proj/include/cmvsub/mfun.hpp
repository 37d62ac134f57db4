#pragma once
// Caratheodory functions of both half-lines and of the whole line.

#include <functional>
#include <iosfwd>
#include <vector>

#include "cmvsub/operator.hpp"

namespace cmv {

// Value plus a pole flag; flagged values are data, not errors.
struct Flagged {
  cplx value;
  bool pole = false;
  double magnitude = 0;  // size of the collapsing denominator
};

constexpr double kNearPole = 1e-12;

// <delta_0, (C + z)(C - z)^{-1} delta_0> for the half-line truncation of size N+1.
cplx f_plus(const CoefficientSource& s, cplx z, long N);
// -f_plus(reflect(s)); anti-Caratheodory.
cplx f_minus(const CoefficientSource& s, cplx z, long N);
// The Mobius map from a left function to M_-(z,0) given alpha_{-1}:
// [Re(1-a) + i Im(1+a) F] / [i Im(1-a) + Re(1+a) F], a = conj(alpha_{-1}).
Flagged m_minus_from_left(cplx alpha_m1, cplx F);
// Fed with 1/f_minus: the left function decoupled with alpha_{-1} = -1.
Flagged m_minus(const CoefficientSource& s, cplx z, long N);

// -1 + [(a0b + 2z + a0 z^2) + (a0 z^2 - a0b)(M + F) + (a0b - 2z + a0 z^2) M F] / (rho0^2 z (F - M))
// with a0b = conj(alpha_0); equals 1 + 2z(G00 + G11).
Flagged f_whole_raw(cplx alpha0, cplx fp, cplx mm, cplx z);
// Borel transform of (Lambda_0 + Lambda_1)/2: (1 + raw)/2 = 1 + z(G00 + G11).
Flagged f_whole_from(cplx alpha0, cplx fp, cplx mm, cplx z);
Flagged f_whole(const CoefficientSource& s, cplx z, long N);
// Sum of Borel transforms of the delta_0 and delta_1 spectral measures of an
// extended truncation over [n_min, n_max] (mass 2).
cplx f_whole_oracle(const CoefficientSource& s, cplx z, long n_min, long n_max);
// (1 - F M)/(F - M) = 1 + 2z G00.
Flagged m00_from(cplx fp, cplx mm);
Flagged m00(const CoefficientSource& s, cplx z, long N);

// (i sin w - F cos w)/(-cos w + i F sin w); same shape for M_-.
Flagged rotate_omega(cplx value, double omega);
cplx rotate_omega_inverse(cplx value, double omega);

struct TruncationParams {
  long N_init = 64;
  long N_max = 4096;
  double tol = 1e-8;
};

struct Adaptive {
  cplx value;
  long N = 0;
  bool converged = false;
  double residual = 0;  // |v(N) - v(2N)|
};
// Doubles N until |v(N) - v(2N)| < tol * max(1, |v(2N)|) or 2N would exceed N_max.
Adaptive adapt(const std::function<cplx(long)>& eval, const TruncationParams& p);

struct CaratheodoryValue {
  cplx z;
  cplx f_plus, f_minus, m_minus, f_whole;
  long truncation_N = 0;
  double stabilization_residual = 0;
  bool converged = false;
  bool near_pole = false;
};
CaratheodoryValue evaluate(const CoefficientSource& s, cplx z, const TruncationParams& p);

enum class Confidence { Stabilized, Extrapolated, Oscillating };
const char* to_string(Confidence c);

struct LimitEstimate {
  cplx value;
  Confidence confidence = Confidence::Oscillating;
};

struct RadialTrace {
  double theta = 0;
  std::vector<double> r_values;
  std::vector<CaratheodoryValue> samples;
  LimitEstimate f_plus_limit, m_minus_limit, f_whole_limit;

  // index of the last converged sample, or -1
  long last_converged() const;
};

std::vector<double> geometric_schedule(int k_max);  // r_k = 1 - 2^{-k}, k = 1..k_max
RadialTrace radial_scan(const CoefficientSource& s, double theta, const std::vector<double>& r_schedule,
                        const TruncationParams& p, double stab_tol = 1e-3);

// Limit of v(r) as r -> 1 from samples at increasing r (converged samples only).
LimitEstimate estimate_limit(const std::vector<double>& r, const std::vector<cplx>& v, double stab_tol);

// theta, r, ReF, ImF, ReF+, ImF+, ReM-, ImM-, N, converged
void write_csv(const RadialTrace& t, std::ostream& os);
void write_jsonl(const RadialTrace& t, std::ostream& os);

}  // namespace cmv
