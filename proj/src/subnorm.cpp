#include "cmvsub/subnorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "json.hpp"

namespace cmv {

namespace {

constexpr long kMaxTrack = 1L << 22;

double sq_norm_right(std::span<const double> sq, double y) {
  long k = long(std::floor(y));
  if (long(sq.size()) < k + 2) throw NeedsExtensionError(k + 2);
  double s = 0;
  for (long j = 0; j <= k; ++j) s += sq[j];
  return s + (y - double(k)) * sq[k + 1];
}

// |first component|^2 of the omega-rotated pair, streamed without storing tracks.
// Index i of the output is lattice index i (plus) or -i-1 (minus).
class WeightStream {
public:
  WeightStream(const CoefficientSource& s, cplx z, double omega, Side side)
      : s_(s), z_(z), side_(side), c_(std::cos(omega)), sn_(std::sin(omega)) {
    const cplx e = std::polar(1.0, omega);
    if (side == Side::Plus) {
      x_ = Vec2(e, std::conj(e));
      y_ = Vec2(e, -std::conj(e));
    } else {
      x_ = Vec2(-1, 1);  // u_-(-1)
      y_ = Vec2(1, 1);   // p_-(-1)
    }
    push();
  }

  void extend(long len) {
    while (long(a_.size()) < len) {
      if (side_ == Side::Plus) {
        Mat2 S = szego_matrix(coefficient(s_, n_), z_).m;
        x_ = S * x_;
        y_ = S * y_;
        ++n_;
      } else {
        Mat2 Ti = gz_step_inverse(s_, -n_ - 2, z_);  // from index -n-1 to -n-2
        x_ = Ti * x_;
        y_ = Ti * y_;
        ++n_;
      }
      push();
    }
  }

  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& pa() const { return pa_; }
  const std::vector<double>& pb() const { return pb_; }

private:
  void push() {
    cplx u, p;
    if (side_ == Side::Plus) {
      u = x_(0);
      p = y_(0);
    } else {
      const cplx is(0, sn_);
      u = c_ * x_(0) + is * y_(0);
      p = is * x_(0) + c_ * y_(0);
    }
    a_.push_back(std::norm(u));
    b_.push_back(std::norm(p));
    pa_.push_back((pa_.empty() ? 0.0 : pa_.back()) + a_.back());
    pb_.push_back((pb_.empty() ? 0.0 : pb_.back()) + b_.back());
  }

  const CoefficientSource& s_;
  cplx z_;
  Side side_;
  double c_, sn_;
  long n_ = 0;
  Vec2 x_, y_;
  std::vector<double> a_, b_, pa_, pb_;  // squares and prefix sums
};

}  // namespace

LocalNorm local_norm(std::span<const double> sq, double x, Side side) {
  if (side == Side::Plus) {
    if (!(x >= 0)) throw std::invalid_argument("local_norm: right side needs x > 0");
    return {x, std::sqrt(sq_norm_right(sq, x))};
  }
  if (!(x <= -1)) throw std::invalid_argument("local_norm: left side needs x < -1");
  double c = std::ceil(x);
  long J = -long(c);
  if (long(sq.size()) < J + 1) throw NeedsExtensionError(J + 1);
  double s = 0;
  for (long j = 1; j <= J; ++j) s += sq[j - 1];
  s += (c - x) * sq[J];
  return {x, std::sqrt(s)};
}

LocalNorm local_norm(const SolutionTrack& t, double x) {
  std::vector<double> sq;
  if (t.lo >= 0) {
    for (long n = 0; n <= t.hi; ++n) sq.push_back(std::norm(t.at(n)(0)));
    return local_norm(sq, x, Side::Plus);
  }
  for (long n = -1; n >= t.lo; --n) sq.push_back(std::norm(t.at(n)(0)));
  return local_norm(sq, x, Side::Minus);
}

JLScale jl_scale(const CoefficientSource& s, cplx z, double r, Side side, double omega) {
  if (!(r >= 0 && r < 1)) throw std::invalid_argument("jl_scale: r must lie in [0,1)");
  WeightStream w(s, z, omega, side);
  const double target = 2.0 / ((1 - r) * (1 - r));
  // A(y) B(y) in the right-side convention; the left side is the same
  // expression at y = -x - 1.
  auto prod = [&](long k) {
    w.extend(k + 2);
    return w.pa()[k] * w.pb()[k];
  };
  if (!(w.a()[0] * w.b()[0] < target)) throw std::domain_error("jl_scale: no scale in range");
  long lo = 0, hi = 1;
  while (prod(hi) < target) {
    lo = hi;
    hi *= 2;
    if (hi > kMaxTrack) throw ScaleUnboundedError("jl_scale: norms stay bounded (both solutions square-summable?)");
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    (prod(mid) < target ? lo : hi) = mid;
  }
  // exact root of the quadratic on [lo, lo + 1]
  const long K = lo;
  w.extend(K + 2);
  const double a0 = w.pa()[K], a1 = w.a()[K + 1], b0 = w.pb()[K], b1 = w.b()[K + 1];
  const double c0 = a0 * b0 - target, c1 = a0 * b1 + a1 * b0, c2 = a1 * b1;
  double t = -2 * c0 / (c1 + std::sqrt(c1 * c1 - 4 * c2 * c0));
  t = std::clamp(t, 0.0, 1.0);
  const double y = double(K) + t;

  JLScale j;
  j.r = r;
  j.x = side == Side::Plus ? y : -y - 1;
  j.norm_u = std::sqrt(sq_norm_right(w.a(), y));
  j.norm_p = std::sqrt(sq_norm_right(w.b(), y));
  j.residual = std::abs((1 - r) * j.norm_u * j.norm_p - std::numbers::sqrt2);
  j.track_length = long(w.a().size());
  return j;
}

double subordinacy_ratio(const CoefficientSource& s, cplx z, Side side, double omega, double r) {
  JLScale j = jl_scale(s, z, r, side, omega);
  return j.norm_p / j.norm_u;
}

const char* to_string(SubordinacyVerdict::Type t) {
  switch (t) {
    case SubordinacyVerdict::Type::NoSubordinate: return "NoSubordinate";
    case SubordinacyVerdict::Type::SubordinateAt: return "SubordinateAt";
    case SubordinacyVerdict::Type::PointCandidate: return "PointCandidate";
    default: return "Undecided";
  }
}

double omega_from_imaginary(double a) { return std::fmod(std::atan2(1.0, -a), std::numbers::pi); }

SubordinacyReport detect_subordinate(const CoefficientSource& s, cplx z, Side side,
                                     const std::vector<double>& r_schedule, const SubordinacyParams& p) {
  using T = SubordinacyVerdict::Type;
  SubordinacyReport rep;
  const CoefficientSource half = side == Side::Plus ? s : reflect(s);
  const double theta = std::arg(z);
  bool unbounded = false;
  std::vector<double> rs;
  std::vector<cplx> fs;
  for (double r : r_schedule) {
    Adaptive a = adapt([&](long N) { return f_plus(half, std::polar(r, theta), N); }, p.trunc);
    SubordinacyRecord rec{z, side, r, std::nullopt, std::nullopt, a.value, a.converged};
    try {
      JLScale j = jl_scale(s, z, r, side, 0.0);
      rec.x = j.x;
      rec.ratio = j.norm_p / j.norm_u;
    } catch (const ScaleUnboundedError&) {
      unbounded = true;
    }
    rep.records.push_back(rec);
    if (a.converged) {
      rs.push_back(r);
      fs.push_back(a.value);
    }
  }

  auto& v = rep.verdict;
  if (unbounded) {
    v = {T::PointCandidate, 0, "JL scale unbounded: both solutions square-summable"};
    return rep;
  }
  if (fs.size() < 2) {
    v = {T::Undecided, 0, "fewer than two converged samples"};
    return rep;
  }
  const cplx last = fs.back(), prev = fs[fs.size() - 2];
  if (std::abs(last) > p.div_threshold && std::abs(last) > std::abs(prev)) {
    v = {T::SubordinateAt, 0, "|F| diverges"};
    return rep;
  }
  LimitEstimate L = estimate_limit(rs, fs, p.stab_tol);
  if (L.confidence == Confidence::Oscillating) {
    v = {T::Undecided, 0, "oscillating trend"};
  } else if (L.value.real() > p.eps_re) {
    v = {T::NoSubordinate, 0, "Re F stabilizes above eps"};
  } else if (std::abs(L.value.real()) < p.eps_re) {
    v = {T::SubordinateAt, omega_from_imaginary(L.value.imag()), "F tends to the imaginary axis"};
  } else {
    v = {T::Undecided, 0, "limit outside the decision bands"};
  }
  return rep;
}

void write_jsonl(const SubordinacyReport& rep, std::ostream& os) {
  for (const auto& r : rep.records) {
    nlohmann::json j = {{"z", {r.z.real(), r.z.imag()}},
                        {"side", r.side == Side::Plus ? "plus" : "minus"},
                        {"r", r.r},
                        {"x", r.x ? nlohmann::json(*r.x) : nlohmann::json(nullptr)},
                        {"ratio", r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json(nullptr)},
                        {"f", {r.f.real(), r.f.imag()}},
                        {"converged", r.converged},
                        {"verdict", to_string(rep.verdict.type)}};
    os << j.dump() << '\n';
  }
}

}  // namespace cmv
