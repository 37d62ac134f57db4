#pragma once
// Local norms, Jitomirskaya-Last scales and subordinacy diagnostics.

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmvsub/mfun.hpp"
#include "cmvsub/recursion.hpp"

namespace cmv {

class NeedsExtensionError : public std::runtime_error {
public:
  explicit NeedsExtensionError(long required)
      : std::runtime_error("track too short: need " + std::to_string(required) + " entries"), required(required) {}
  long required;
};

class ScaleUnboundedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LocalNorm {
  double x;
  double value;
};

// Plus: sq[j] = |a_j|^2, j >= 0, x > 0.
// Minus: sq[j-1] = |a_{-j}|^2, j >= 1, x < -1, with J = -ceil(x):
//   sum_{j=1}^{J} |a_{-j}|^2 + (ceil(x) - x) |a_{-J-1}|^2.
LocalNorm local_norm(std::span<const double> sq, double x, Side side);
// First component of a track; side from the track window.
LocalNorm local_norm(const SolutionTrack& t, double x);

struct JLScale {
  double r = 0;
  double x = 0;
  double residual = 0;   // |(1-r) ||a||_x ||b||_x - sqrt 2|
  double norm_u = 0;     // ||u_w||_x
  double norm_p = 0;     // ||p_w||_x
  long track_length = 0;
};

// Solves (1 - r) ||u_w||_x ||p_w||_x = sqrt 2 for z on the unit circle.
JLScale jl_scale(const CoefficientSource& s, cplx z, double r, Side side, double omega = 0);
// ||p_w|| / ||u_w|| at x(r).
double subordinacy_ratio(const CoefficientSource& s, cplx z, Side side, double omega, double r);

struct SubordinacyVerdict {
  enum class Type { NoSubordinate, SubordinateAt, PointCandidate, Undecided };
  Type type = Type::Undecided;
  double omega = 0;  // SubordinateAt only
  std::string reason;
};
const char* to_string(SubordinacyVerdict::Type t);

struct SubordinacyParams {
  double eps_re = 1e-3;
  double div_threshold = 1e4;
  double stab_tol = 1e-3;
  TruncationParams trunc;
};

struct SubordinacyRecord {
  cplx z;
  Side side;
  double r;
  std::optional<double> x, ratio;
  cplx f;  // half-line Caratheodory function of that side at r z
  bool converged;
};

struct SubordinacyReport {
  SubordinacyVerdict verdict;
  std::vector<SubordinacyRecord> records;
};

// omega in [0, pi) with F = -i cot(omega) for F = i a.
double omega_from_imaginary(double a);

// Minus side works on the left half-line, i.e. with the Caratheodory
// function -F_- of the reflected problem; omega refers to that boundary family.
SubordinacyReport detect_subordinate(const CoefficientSource& s, cplx z, Side side,
                                     const std::vector<double>& r_schedule,
                                     const SubordinacyParams& p = {});

// One JSON object per record: z, side, r, x, ratio, verdict.
void write_jsonl(const SubordinacyReport& rep, std::ostream& os);

}  // namespace cmv
