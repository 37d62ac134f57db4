#include "cmvsub/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cmv {

namespace {

// splitmix64 finalizer; keyed by (seed, n) so evaluation stays stateless.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit(std::uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

cplx random_alpha(const RandomIID& r, long n) {
  std::uint64_t h = mix(r.seed ^ mix(std::uint64_t(n)));
  double u1 = unit(mix(h)), u2 = unit(mix(h + 1));
  return std::polar(r.radius * std::sqrt(u1), 2 * std::numbers::pi * u2);
}

void check_inside(cplx a, const char* what) {
  if (!(std::abs(a) < 1.0))
    throw std::invalid_argument(std::string(what) + ": |alpha| must be < 1");
}

}  // namespace

OutOfRangeError::OutOfRangeError(long n, long lo, long hi)
    : std::out_of_range("explicit source: index " + std::to_string(n) + " outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]"),
      index(n) {}

Verblunsky Verblunsky::of(cplx a) {
  double m = std::abs(a);
  return {a, std::sqrt(std::max(0.0, (1.0 - m) * (1.0 + m)))};
}

CoefficientSource::CoefficientSource(Kind k) : kind_(std::move(k)) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Explicit>) {
          for (cplx a : v.values) check_inside(a, "explicit");
        } else if constexpr (std::is_same_v<T, Constant>) {
          check_inside(v.alpha, "constant");
        } else if constexpr (std::is_same_v<T, RandomIID>) {
          if (!(v.radius >= 0 && v.radius < 1))
            throw std::invalid_argument("random_iid: radius must lie in [0,1)");
        } else {
          if (!(v.lambda >= 0 && v.lambda < 1))
            throw std::invalid_argument("quasi_periodic: lambda must lie in [0,1)");
        }
      },
      kind_);
}

cplx CoefficientSource::raw(long n) const {
  return std::visit(
      [n](const auto& v) -> cplx {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Explicit>) {
          long k = n - v.base;
          if (k < 0 || k >= long(v.values.size()))
            throw OutOfRangeError(n, v.base, v.base + long(v.values.size()) - 1);
          return v.values[k];
        } else if constexpr (std::is_same_v<T, Constant>) {
          return v.alpha;
        } else if constexpr (std::is_same_v<T, RandomIID>) {
          return random_alpha(v, n);
        } else {
          double t = double(n) * v.beta + v.phase;
          t -= std::floor(t);
          return std::polar(v.lambda, 2 * std::numbers::pi * t);
        }
      },
      kind_);
}

cplx CoefficientSource::alpha(long n) const {
  return reflected_ ? -std::conj(raw(-n - 2)) : raw(n);
}

std::string CoefficientSource::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Explicit>)
          os << "explicit(base=" << v.base << ", len=" << v.values.size() << ")";
        else if constexpr (std::is_same_v<T, Constant>)
          os << "constant(" << v.alpha.real() << "," << v.alpha.imag() << ")";
        else if constexpr (std::is_same_v<T, RandomIID>)
          os << "random_iid(seed=" << v.seed << ", radius=" << v.radius << ")";
        else
          os << "quasi_periodic(lambda=" << v.lambda << ", beta=" << v.beta
             << ", phase=" << v.phase << ")";
      },
      kind_);
  if (reflected_) return "reflect(" + os.str() + ")";
  return os.str();
}

Verblunsky coefficient(const CoefficientSource& s, long n) { return Verblunsky::of(s.alpha(n)); }

CoefficientSource reflect(const CoefficientSource& s) {
  if (!s.reflected_) {
    if (auto c = std::get_if<Constant>(&s.kind_)) return Constant{-std::conj(c->alpha)};
    if (auto e = std::get_if<Explicit>(&s.kind_)) {
      // window [b, b+L-1] maps to [-b-L-1, -b-2], reversed
      Explicit r;
      long L = long(e->values.size());
      r.base = -e->base - L - 1;
      r.values.reserve(L);
      for (long k = L - 1; k >= 0; --k) r.values.push_back(-std::conj(e->values[k]));
      return r;
    }
  }
  CoefficientSource out = s;
  out.reflected_ = !s.reflected_;
  return out;
}

}  // namespace cmv
