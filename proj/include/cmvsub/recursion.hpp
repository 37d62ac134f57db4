#pragma once
// Szego and Gesztesy-Zinchenko recursions, transfer matrices, solution tracks.

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "cmvsub/operator.hpp"

namespace cmv {

class SingularCoefficientError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

enum class Side { Plus, Minus };
enum class Kind { First, Second };
enum class Parity { Even, Odd };

struct Transfer2x2 {
  enum class Type { S, P, Q, Product };
  Mat2 m;
  Type type = Type::Product;
};

// (1/rho)[[z, -conj a], [-a z, 1]]
Transfer2x2 szego_matrix(const Verblunsky& a, cplx z);
// even: (1/rho)[[-a, 1/z], [z, -conj a]];  odd: (1/rho)[[-conj a, 1], [1, -a]]
Transfer2x2 gz_matrix(const Verblunsky& a, cplx z, Parity p);
inline Parity parity_of(long n) { return (n % 2 == 0) ? Parity::Even : Parity::Odd; }
// T(n, z): P for even n, Q for odd n.
Transfer2x2 gz_step(const CoefficientSource& s, long n, cplx z);
// T(n, z)^{-1} in closed form (det T = -1).
Mat2 gz_step_inverse(const CoefficientSource& s, long n, cplx z);

// n >= 0: S(a_n)...S(a_0).  n <= -1: S(-conj a_{n-2}) S(-conj a_{n-1}) ... S(-conj a_{-2}).
Transfer2x2 transfer_product(const CoefficientSource& s, long n, cplx z);

// log ||A(n, z)|| for n = 1..n_max on one side (Minus: n = -1..-n_max),
// with renormalization so that nothing overflows.
std::vector<double> log_norm_series(const CoefficientSource& s, cplx z, long n_max, Side side);

// Largest singular value of a 2x2 matrix.
double norm2(const Mat2& m);

struct SolutionTrack {
  enum class Flavor { PolyFirst, PolySecond, GZPlus, GZPlusSecond, GZMinus, GZMinusSecond, Omega };
  Flavor flavor;
  cplx z;
  double omega = 0;
  long lo = 0, hi = 0;        // inclusive index window
  std::vector<Vec2> values{};  // values[n - lo]

  const Vec2& at(long n) const;
  std::size_t size() const { return values.size(); }
};

// PolyFirst stores (phi_n, phi*_n); PolySecond stores the propagated vector (psi_n, -psi*_n).
SolutionTrack polynomials(const CoefficientSource& s, cplx z, long N, Kind kind);

// Plus: n = 0..N from (1,1) [first] or (1,-1) [second].
// Minus: n = -1..-N-1 from (-1,1) [first] or (1,1) [second], propagated with T^{-1}.
SolutionTrack gz_track(const CoefficientSource& s, cplx z, Side side, Kind kind, long N);

// Plus: Szego vectors from (e^{iw}, e^{-iw}) [first] and (e^{iw}, -e^{-iw}) [second].
// Minus: cos w u_- + i sin w p_- and i sin w u_- + cos w p_- from the GZ minus tracks.
struct OmegaPair {
  SolutionTrack first, second;
};
OmegaPair omega_track(const CoefficientSource& s, cplx z, double omega, long N, Side side);

// Whole-line solution through index 0 with (u, v)(0) = x0, propagated with T to
// [0, N] and T^{-1} to [-N, -1].
SolutionTrack whole_line_track(const CoefficientSource& s, cplx z, const Vec2& x0, long N);

// CSV: n, re0, im0, re1, im1
void write_csv(const SolutionTrack& t, std::ostream& os);

}  // namespace cmv
