#pragma once
// Spectral-type verdicts on a grid of the unit circle.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmvsub/mfun.hpp"
#include "cmvsub/recursion.hpp"

namespace cmv {

class UnsupportedConfigurationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Verdict { AC, Singular, PointCandidate, Gap, Undetermined };
const char* to_string(Verdict v);

struct TransferGrowth {
  enum class Type { Bounded, Growing, Inconclusive };
  Type type = Type::Inconclusive;
  double sup = 0;   // sup ||A(n,z)|| over the window
  double rate = 0;  // least-squares slope of log||A(n,z)|| over the second half
};
const char* to_string(TransferGrowth::Type t);

struct BoundedCheck {
  TransferGrowth plus, minus;
};

struct ClassifyParams {
  std::vector<double> r_schedule = geometric_schedule(20);
  TruncationParams trunc;
  double eps_re = 1e-3;
  double div_threshold = 1e4;
  double stab_tol = 1e-3;
  double agree_tol = 1e-3;    // |F+ - M-| relative agreement for Singular
  double gap_sep = 1e-6;      // |F+ - M-| relative separation for Gap
  double gap_r_min = 1 - 0x1p-10;
  double decay_tol = 1e-3;    // tail-sum ratio for PointCandidate
  long transfer_n = 4096;
  double bounded_sup = 1e3;
  double whole_scale = 1.0;   // multiplies F; verdicts must not depend on it
};

struct Evidence {
  cplx f_plus_limit, m_minus_limit, f_whole_limit;
  double re_f_last = 0;  // scaled Re F at the last converged r
  double r_last = 0;     // -1 when nothing converged
  double lyap_plus = 0, lyap_minus = 0;
  TransferGrowth::Type bounded_plus = TransferGrowth::Type::Inconclusive;
  TransferGrowth::Type bounded_minus = TransferGrowth::Type::Inconclusive;
  std::optional<double> decay_plus, decay_minus;  // tail-sum ratios when checked
  std::string note;
};

struct SpectralClassification {
  double theta = 0;
  Verdict verdict = Verdict::Undetermined;
  Confidence confidence = Confidence::Oscillating;
  Evidence evidence;
  // Singular/PointCandidate on a side where the transfer matrices stay bounded
  bool coherence_violation = false;
};

TransferGrowth transfer_growth(const CoefficientSource& s, cplx z, long n_max, Side side, double bounded_sup = 1e3);
BoundedCheck bounded_transfer_check(const CoefficientSource& s, double theta, long n_max, double bounded_sup = 1e3);

// Tail-sum ratio sum_{tail} |x|^2 / sum_{head} |x|^2 of the whole-line solution
// through (1 + beta, beta - 1) at index 0, walking to +inf (plus) or -inf (minus).
// The walk stops when the solution drops below 1e-10 of its start, regrows 1e4
// above its running minimum (an inexact beta), or reaches n_cap; head and tail
// split the stretch up to the minimum. +inf when that stretch is under 16 steps.
double decay_ratio(const CoefficientSource& s, cplx z, cplx beta, Side side, long n_cap);

SpectralClassification classify_point(const CoefficientSource& s, double theta, const ClassifyParams& p = {});
// theta_j = 2 pi j / count; `jobs` worker threads, results in grid order.
std::vector<SpectralClassification> classify_grid(const CoefficientSource& s, long count,
                                                  const ClassifyParams& p = {}, int jobs = 1);
std::vector<SpectralClassification> classify_thetas(const CoefficientSource& s, const std::vector<double>& thetas,
                                                    const ClassifyParams& p = {}, int jobs = 1);

struct Ellipticity {
  enum class Type { Elliptic, Hyperbolic, Parabolic };
  Type type;
  double trace;  // 2 cos(theta/2) / rho
};
const char* to_string(Ellipticity::Type t);
Ellipticity ellipticity_check(const CoefficientSource& s, double theta);

// z^{-1/2} S(alpha, z), principal branch with arg z in [0, 2 pi).
Mat2 normalized_szego(cplx alpha, double theta);

struct ConjugacyResult {
  bool verified = false;
  double residual = 0;      // max ||A(w) - B(Tw) A0 B(w)^{-1}||
  double power_bound = 0;   // max_{n <= 1e4} ||A0^n||
  double trace = 0;         // |trace A0|
  double witness = 0;       // worst sampled phase
};
// Phase w in [0,1): constant sources ignore it; quasi-periodic sources use
// alpha(w) = lambda e^{2 pi i w} and T w = w + beta mod 1.
ConjugacyResult verify_conjugacy(const CoefficientSource& s, double theta, const std::function<Mat2(double)>& B,
                                 const Mat2& A0, int samples, double tol = 1e-10);

// theta, verdict, ReF_limit, lyap_plus, lyap_minus, confidence [, config_hash]
void write_csv(const std::vector<SpectralClassification>& v, std::ostream& os, const std::string& hash = "");
void write_jsonl(const std::vector<SpectralClassification>& v, std::ostream& os, const std::string& hash = "");

}  // namespace cmv
