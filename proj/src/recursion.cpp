#include "cmvsub/recursion.hpp"

#include <cmath>
#include <ostream>

namespace cmv {

namespace {

void check_rho(const Verblunsky& a) {
  if (!(a.rho > 0)) throw SingularCoefficientError("|alpha| = 1: transfer matrix undefined");
}

Vec2 vec(cplx a, cplx b) { return Vec2(a, b); }

}  // namespace

Transfer2x2 szego_matrix(const Verblunsky& a, cplx z) {
  check_rho(a);
  Mat2 m;
  m << z, -std::conj(a.alpha), -a.alpha * z, 1.0;
  return {m / a.rho, Transfer2x2::Type::S};
}

Transfer2x2 gz_matrix(const Verblunsky& a, cplx z, Parity p) {
  check_rho(a);
  Mat2 m;
  if (p == Parity::Even) {
    m << -a.alpha, 1.0 / z, z, -std::conj(a.alpha);
    return {m / a.rho, Transfer2x2::Type::P};
  }
  m << -std::conj(a.alpha), 1.0, 1.0, -a.alpha;
  return {m / a.rho, Transfer2x2::Type::Q};
}

Transfer2x2 gz_step(const CoefficientSource& s, long n, cplx z) {
  return gz_matrix(coefficient(s, n), z, parity_of(n));
}

Mat2 gz_step_inverse(const CoefficientSource& s, long n, cplx z) {
  Verblunsky a = coefficient(s, n);
  check_rho(a);
  Mat2 m;
  if (parity_of(n) == Parity::Even)
    m << std::conj(a.alpha), 1.0 / z, z, a.alpha;
  else
    m << a.alpha, 1.0, 1.0, std::conj(a.alpha);
  return m / a.rho;
}

Transfer2x2 transfer_product(const CoefficientSource& s, long n, cplx z) {
  Mat2 m = Mat2::Identity();
  if (n >= 0) {
    for (long k = 0; k <= n; ++k) m = szego_matrix(coefficient(s, k), z).m * m;
  } else {
    // factors S(-conj a_k) for k = n-2 .. -2, leftmost smallest
    for (long k = -2; k >= n - 2; --k) m = szego_matrix(Verblunsky::of(-std::conj(s.alpha(k))), z).m * m;
  }
  return {m, Transfer2x2::Type::Product};
}

double norm2(const Mat2& m) {
  const double c = m.cwiseAbs().maxCoeff();
  if (c == 0 || !std::isfinite(c)) return c;
  const Mat2 u = m / c;  // keeps squares clear of overflow
  // Gram matrix [[p, r], [conj r, q]]; the discriminant is a sum of squares,
  // so nearly equal singular values do not cancel
  const double p = std::norm(u(0, 0)) + std::norm(u(1, 0)), q = std::norm(u(0, 1)) + std::norm(u(1, 1));
  const cplx r = std::conj(u(0, 0)) * u(0, 1) + std::conj(u(1, 0)) * u(1, 1);
  return c * std::sqrt(0.5 * (p + q + std::sqrt((p - q) * (p - q) + 4 * std::norm(r))));
}

std::vector<double> log_norm_series(const CoefficientSource& s, cplx z, long n_max, Side side) {
  std::vector<double> out;
  out.reserve(n_max + 1);
  Mat2 m = Mat2::Identity();
  double scale = 0;
  auto step = [&](const Verblunsky& a) {
    m = szego_matrix(a, z).m * m;
    double nm = norm2(m);
    if (nm > 1e50 || nm < 1e-50) {
      m /= nm;
      scale += std::log(nm);
    }
  };
  if (side == Side::Plus) {
    for (long k = 0; k <= n_max; ++k) {
      step(coefficient(s, k));
      out.push_back(scale + std::log(norm2(m)));
    }
  } else {
    // A(-k-1) = S(-conj a_{-k-3}) ... S(-conj a_{-2})
    step(Verblunsky::of(-std::conj(s.alpha(-2))));
    for (long k = 0; k <= n_max; ++k) {
      step(Verblunsky::of(-std::conj(s.alpha(-k - 3))));
      out.push_back(scale + std::log(norm2(m)));
    }
  }
  return out;
}

const Vec2& SolutionTrack::at(long n) const {
  if (n < lo || n > hi) throw std::out_of_range("track index " + std::to_string(n) + " outside window");
  return values[std::size_t(n - lo)];
}

SolutionTrack polynomials(const CoefficientSource& s, cplx z, long N, Kind kind) {
  SolutionTrack t{kind == Kind::First ? SolutionTrack::Flavor::PolyFirst : SolutionTrack::Flavor::PolySecond, z};
  t.lo = 0;
  t.hi = N;
  t.values.reserve(N + 1);
  Vec2 x = kind == Kind::First ? vec(1, 1) : vec(1, -1);
  t.values.push_back(x);
  for (long n = 0; n < N; ++n) {
    x = szego_matrix(coefficient(s, n), z).m * x;
    t.values.push_back(x);
  }
  return t;
}

SolutionTrack gz_track(const CoefficientSource& s, cplx z, Side side, Kind kind, long N) {
  using F = SolutionTrack::Flavor;
  SolutionTrack t{F::GZPlus, z};
  t.values.reserve(N + 1);
  if (side == Side::Plus) {
    t.flavor = kind == Kind::First ? F::GZPlus : F::GZPlusSecond;
    t.lo = 0;
    t.hi = N;
    Vec2 x = kind == Kind::First ? vec(1, 1) : vec(1, -1);
    t.values.push_back(x);
    for (long n = 0; n < N; ++n) {
      x = gz_step(s, n, z).m * x;
      t.values.push_back(x);
    }
    return t;
  }
  t.flavor = kind == Kind::First ? F::GZMinus : F::GZMinusSecond;
  t.lo = -N - 1;
  t.hi = -1;
  std::vector<Vec2> back;
  back.reserve(N + 1);
  Vec2 x = kind == Kind::First ? vec(-1, 1) : vec(1, 1);
  back.push_back(x);
  for (long n = -1; n > -N - 1; --n) {
    x = gz_step_inverse(s, n - 1, z) * x;  // x(n-1) = T(n-1)^{-1} x(n)
    back.push_back(x);
  }
  t.values.assign(back.rbegin(), back.rend());
  return t;
}

OmegaPair omega_track(const CoefficientSource& s, cplx z, double omega, long N, Side side) {
  using F = SolutionTrack::Flavor;
  const cplx e = std::polar(1.0, omega);
  if (side == Side::Plus) {
    OmegaPair p{{F::Omega, z, omega, 0, N, {}}, {F::Omega, z, omega, 0, N, {}}};
    Vec2 a = vec(e, std::conj(e)), b = vec(e, -std::conj(e));
    p.first.values.reserve(N + 1);
    p.second.values.reserve(N + 1);
    p.first.values.push_back(a);
    p.second.values.push_back(b);
    for (long n = 0; n < N; ++n) {
      Mat2 S = szego_matrix(coefficient(s, n), z).m;
      a = S * a;
      b = S * b;
      p.first.values.push_back(a);
      p.second.values.push_back(b);
    }
    return p;
  }
  SolutionTrack u = gz_track(s, z, Side::Minus, Kind::First, N);
  SolutionTrack q = gz_track(s, z, Side::Minus, Kind::Second, N);
  const double c = std::cos(omega), sn = std::sin(omega);
  const cplx is(0, sn);
  OmegaPair p{{F::Omega, z, omega, u.lo, u.hi, {}}, {F::Omega, z, omega, u.lo, u.hi, {}}};
  p.first.values.reserve(u.size());
  p.second.values.reserve(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    p.first.values.push_back(c * u.values[k] + is * q.values[k]);
    p.second.values.push_back(is * u.values[k] + c * q.values[k]);
  }
  return p;
}

SolutionTrack whole_line_track(const CoefficientSource& s, cplx z, const Vec2& x0, long N) {
  SolutionTrack t{SolutionTrack::Flavor::GZPlus, z};
  t.lo = -N;
  t.hi = N;
  t.values.assign(std::size_t(2 * N + 1), Vec2::Zero());
  Vec2 x = x0;
  t.values[N] = x;
  for (long n = 0; n < N; ++n) {
    x = gz_step(s, n, z).m * x;
    t.values[std::size_t(N + n + 1)] = x;
  }
  x = x0;
  for (long n = 0; n > -N; --n) {
    x = gz_step_inverse(s, n - 1, z) * x;
    t.values[std::size_t(N + n - 1)] = x;
  }
  return t;
}

void write_csv(const SolutionTrack& t, std::ostream& os) {
  auto prec = os.precision(17);
  os << "n,re0,im0,re1,im1\n";
  for (long n = t.lo; n <= t.hi; ++n) {
    const Vec2& v = t.at(n);
    os << n << ',' << v(0).real() << ',' << v(0).imag() << ',' << v(1).real() << ',' << v(1).imag() << '\n';
  }
  os.precision(prec);
}

}  // namespace cmv
