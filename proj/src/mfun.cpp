#include "cmvsub/mfun.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"

namespace cmv {

namespace {

const cplx I(0, 1);

Flagged divide(cplx num, cplx den, double scale) {
  double m = std::abs(den);
  Flagged f{num / den, m < kNearPole * std::max(1.0, scale), m};
  return f;
}

nlohmann::json jc(cplx v) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return nlohmann::json::array({num(v.real()), num(v.imag())});
}

}  // namespace

cplx f_plus(const CoefficientSource& s, cplx z, long N) {
  if (N < 8) throw std::invalid_argument("f_plus: N must be >= 8");
  if (!(std::abs(z) < 1)) throw std::invalid_argument("f_plus: |z| must be < 1");
  return borel_diagonal(build_half_line_plus(s, N, 1.0), 0, z);
}

cplx f_minus(const CoefficientSource& s, cplx z, long N) { return -f_plus(reflect(s), z, N); }

Flagged m_minus_from_left(cplx alpha_m1, cplx F) {
  cplx a = std::conj(alpha_m1);
  cplx num = (1.0 - a).real() + I * (1.0 + a).imag() * F;
  cplx den = I * (1.0 - a).imag() + (1.0 + a).real() * F;
  return divide(num, den, std::abs(num));
}

Flagged m_minus(const CoefficientSource& s, cplx z, long N) {
  return m_minus_from_left(s.alpha(-1), 1.0 / f_minus(s, z, N));
}

Flagged f_whole_raw(cplx alpha0, cplx fp, cplx mm, cplx z) {
  cplx ab = std::conj(alpha0), z2 = z * z;
  double rho2 = 1.0 - std::norm(alpha0);
  cplx num = (ab + 2.0 * z + alpha0 * z2) + (alpha0 * z2 - ab) * (mm + fp) + (ab - 2.0 * z + alpha0 * z2) * mm * fp;
  cplx gap = fp - mm;
  Flagged f = divide(num, rho2 * z * gap, 0.0);
  f.value -= 1.0;
  f.magnitude = std::abs(gap);
  f.pole = std::abs(gap) < kNearPole;
  return f;
}

Flagged f_whole_from(cplx alpha0, cplx fp, cplx mm, cplx z) {
  Flagged f = f_whole_raw(alpha0, fp, mm, z);
  f.value = 0.5 * (1.0 + f.value);
  return f;
}

Flagged f_whole(const CoefficientSource& s, cplx z, long N) {
  Flagged mm = m_minus(s, z, N);
  return f_whole_from(s.alpha(0), f_plus(s, z, N), mm.value, z);
}

cplx f_whole_oracle(const CoefficientSource& s, cplx z, long n_min, long n_max) {
  return spectral_measure(build_extended(s, n_min, n_max), {0, 1}).borel(z);
}

Flagged m00_from(cplx fp, cplx mm) {
  cplx gap = fp - mm;
  Flagged f = divide(1.0 - fp * mm, gap, 0.0);
  f.pole = std::abs(gap) < kNearPole;
  return f;
}

Flagged m00(const CoefficientSource& s, cplx z, long N) {
  return m00_from(f_plus(s, z, N), m_minus(s, z, N).value);
}

Flagged rotate_omega(cplx value, double omega) {
  double c = std::cos(omega), sn = std::sin(omega);
  cplx num = I * sn - value * c;
  cplx den = -c + I * value * sn;
  Flagged f{num / den, false, std::abs(den)};
  f.pole = std::abs(den) <= 1e-15 * std::max(1.0, std::abs(num));
  return f;
}

cplx rotate_omega_inverse(cplx value, double omega) {
  double c = std::cos(omega), sn = std::sin(omega);
  return (c * value + I * sn) / (I * sn * value + c);
}

Adaptive adapt(const std::function<cplx(long)>& eval, const TruncationParams& p) {
  Adaptive a;
  a.N = p.N_init;
  a.value = eval(a.N);
  a.residual = INFINITY;
  while (2 * a.N <= p.N_max) {
    cplx next = eval(2 * a.N);
    a.residual = std::abs(next - a.value);
    a.N *= 2;
    a.value = next;
    if (a.residual < p.tol * std::max(1.0, std::abs(next))) {
      a.converged = true;
      break;
    }
  }
  return a;
}

CaratheodoryValue evaluate(const CoefficientSource& s, cplx z, const TruncationParams& p) {
  CoefficientSource rs = reflect(s);
  const cplx a0 = s.alpha(0), am1 = s.alpha(-1);
  auto pair = [&](long N) { return std::pair{f_plus(s, z, N), -f_plus(rs, z, N)}; };

  CaratheodoryValue v;
  v.z = z;
  long N = p.N_init;
  auto cur = pair(N);
  double res = INFINITY;
  bool ok = false;
  while (2 * N <= p.N_max) {
    auto next = pair(2 * N);
    res = std::max(std::abs(next.first - cur.first) / std::max(1.0, std::abs(next.first)),
                   std::abs(next.second - cur.second) / std::max(1.0, std::abs(next.second)));
    N *= 2;
    cur = next;
    if (res < p.tol) {
      ok = true;
      break;
    }
  }
  v.f_plus = cur.first;
  v.f_minus = cur.second;
  Flagged mm = m_minus_from_left(am1, 1.0 / v.f_minus);
  v.m_minus = mm.value;
  Flagged fw = f_whole_from(a0, v.f_plus, v.m_minus, z);
  v.f_whole = fw.value;
  v.near_pole = fw.pole || mm.pole;
  v.truncation_N = N;
  v.stabilization_residual = res;
  v.converged = ok;
  return v;
}

const char* to_string(Confidence c) {
  switch (c) {
    case Confidence::Stabilized: return "stabilized";
    case Confidence::Extrapolated: return "extrapolated";
    default: return "oscillating";
  }
}

long RadialTrace::last_converged() const {
  for (long k = long(samples.size()) - 1; k >= 0; --k)
    if (samples[k].converged && !samples[k].near_pole) return k;
  return -1;
}

std::vector<double> geometric_schedule(int k_max) {
  std::vector<double> r;
  for (int k = 1; k <= k_max; ++k) r.push_back(1.0 - std::ldexp(1.0, -k));
  return r;
}

LimitEstimate estimate_limit(const std::vector<double>& r, const std::vector<cplx>& v, double stab_tol) {
  LimitEstimate e;
  const std::size_t n = v.size();
  if (n == 0) return {cplx(NAN, NAN), Confidence::Oscillating};
  e.value = v.back();
  if (n < 2) return e;
  cplx d1 = v[n - 1] - v[n - 2];
  if (std::abs(d1) <= stab_tol * std::max(1.0, std::abs(v[n - 1]))) {
    e.confidence = Confidence::Stabilized;
    return e;
  }
  // linear in (1 - r), extrapolated to r = 1
  double h1 = 1 - r[n - 1], h0 = 1 - r[n - 2];
  cplx lin = v[n - 1] + d1 * h1 / (h0 - h1);
  if (n >= 3) {
    cplx d0 = v[n - 2] - v[n - 3];
    double h = 1 - r[n - 3];
    // differences must shrink at least as fast as the step in (1 - r)
    if (std::abs(d1) <= 1.25 * std::abs(d0) * (h0 - h1) / (h - h0)) {
      e.value = lin;
      e.confidence = Confidence::Extrapolated;
    }
  }
  return e;
}

RadialTrace radial_scan(const CoefficientSource& s, double theta, const std::vector<double>& r_schedule,
                        const TruncationParams& p, double stab_tol) {
  if (r_schedule.empty()) throw std::invalid_argument("radial_scan: empty r schedule");
  for (std::size_t k = 1; k < r_schedule.size(); ++k)
    if (!(r_schedule[k] > r_schedule[k - 1])) throw std::invalid_argument("radial_scan: r must increase");
  RadialTrace t;
  t.theta = theta;
  t.r_values = r_schedule;
  for (double r : r_schedule) t.samples.push_back(evaluate(s, std::polar(r, theta), p));

  std::vector<double> rs;
  std::vector<cplx> fp, mm, fw;
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    const auto& c = t.samples[k];
    if (!c.converged || c.near_pole) continue;
    rs.push_back(r_schedule[k]);
    fp.push_back(c.f_plus);
    mm.push_back(c.m_minus);
    fw.push_back(c.f_whole);
  }
  t.f_plus_limit = estimate_limit(rs, fp, stab_tol);
  t.m_minus_limit = estimate_limit(rs, mm, stab_tol);
  t.f_whole_limit = estimate_limit(rs, fw, stab_tol);
  return t;
}

void write_csv(const RadialTrace& t, std::ostream& os) {
  auto prec = os.precision(17);
  os << "theta,r,ReF,ImF,ReFplus,ImFplus,ReMminus,ImMminus,N,converged\n";
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    const auto& c = t.samples[k];
    os << t.theta << ',' << t.r_values[k] << ',' << c.f_whole.real() << ',' << c.f_whole.imag() << ','
       << c.f_plus.real() << ',' << c.f_plus.imag() << ',' << c.m_minus.real() << ',' << c.m_minus.imag() << ','
       << c.truncation_N << ',' << (c.converged ? 1 : 0) << '\n';
  }
  os.precision(prec);
}

void write_jsonl(const RadialTrace& t, std::ostream& os) {
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    const auto& c = t.samples[k];
    nlohmann::json j = {{"theta", t.theta},          {"r", t.r_values[k]},
                        {"f_whole", jc(c.f_whole)},  {"f_plus", jc(c.f_plus)},
                        {"f_minus", jc(c.f_minus)},  {"m_minus", jc(c.m_minus)},
                        {"N", c.truncation_N},       {"converged", c.converged},
                        {"near_pole", c.near_pole},  {"residual", c.stabilization_residual}};
    os << j.dump() << '\n';
  }
}

}  // namespace cmv
