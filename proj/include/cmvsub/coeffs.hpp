#pragma once
// Verblunsky coefficient sources indexed over Z.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cmv {

using cplx = std::complex<double>;

class OutOfRangeError : public std::out_of_range {
public:
  OutOfRangeError(long n, long lo, long hi);
  long index;
};

struct Verblunsky {
  cplx alpha;
  double rho;

  // rho from sqrt((1-|a|)(1+|a|)); accurate near |a| = 1.
  static Verblunsky of(cplx a);
};

struct Explicit {
  std::vector<cplx> values;  // values[k] = alpha_{base+k}
  long base = 0;
};
struct Constant {
  cplx alpha;
};
struct RandomIID {
  std::uint64_t seed = 0;
  double radius = 0.5;  // r0 < 1, area-uniform on the disk
};
struct QuasiPeriodic {
  double lambda = 0;
  double beta = 0;
  double phase = 0;  // alpha_n = lambda e^{2 pi i (n beta + phase)}
};

class CoefficientSource {
public:
  using Kind = std::variant<Explicit, Constant, RandomIID, QuasiPeriodic>;

  CoefficientSource(Kind k);  // validates |alpha| < 1
  CoefficientSource(Explicit e) : CoefficientSource(Kind(std::move(e))) {}
  CoefficientSource(Constant c) : CoefficientSource(Kind(c)) {}
  CoefficientSource(RandomIID r) : CoefficientSource(Kind(r)) {}
  CoefficientSource(QuasiPeriodic q) : CoefficientSource(Kind(q)) {}

  const Kind& kind() const { return kind_; }
  bool reflected() const { return reflected_; }
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }

  cplx alpha(long n) const;
  std::string describe() const;

private:
  friend CoefficientSource reflect(const CoefficientSource&);
  cplx raw(long n) const;

  Kind kind_;
  // Kinds without a closed reflected form evaluate -conj(alpha_{-n-2}) lazily.
  bool reflected_ = false;
};

Verblunsky coefficient(const CoefficientSource& s, long n);

// alpha~_n = -conj(alpha_{-(n+2)}); an involution.
CoefficientSource reflect(const CoefficientSource& s);

inline CoefficientSource free_source() { return Constant{0.0}; }

}  // namespace cmv
