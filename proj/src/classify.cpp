#include "cmvsub/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace cmv {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double slope(const std::vector<double>& y, std::size_t from) {
  const double n = double(y.size() - from);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = from; k < y.size(); ++k) {
    double x = double(k);
    sx += x;
    sy += y[k];
    sxx += x * x;
    sxy += x * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::AC: return "AC";
    case Verdict::Singular: return "Singular";
    case Verdict::PointCandidate: return "PointCandidate";
    case Verdict::Gap: return "Gap";
    default: return "Undetermined";
  }
}

const char* to_string(TransferGrowth::Type t) {
  switch (t) {
    case TransferGrowth::Type::Bounded: return "bounded";
    case TransferGrowth::Type::Growing: return "growing";
    default: return "inconclusive";
  }
}

const char* to_string(Ellipticity::Type t) {
  switch (t) {
    case Ellipticity::Type::Elliptic: return "elliptic";
    case Ellipticity::Type::Hyperbolic: return "hyperbolic";
    default: return "parabolic";
  }
}

TransferGrowth transfer_growth(const CoefficientSource& s, cplx z, long n_max, Side side, double bounded_sup) {
  if (n_max < 32) throw std::invalid_argument("transfer_growth: n_max must be >= 32");
  std::vector<double> y = log_norm_series(s, z, n_max, side);
  const std::size_t half = y.size() / 2;
  double m1 = *std::max_element(y.begin(), y.begin() + half);
  double m2 = *std::max_element(y.begin() + half, y.end());
  TransferGrowth g;
  g.sup = std::exp(std::max(m1, m2));
  g.rate = slope(y, half);
  if (g.sup < bounded_sup && m2 - m1 < std::log(2.0))
    g.type = TransferGrowth::Type::Bounded;
  else if (m2 - m1 > std::log(10.0) && g.rate > 0)
    g.type = TransferGrowth::Type::Growing;
  return g;
}

BoundedCheck bounded_transfer_check(const CoefficientSource& s, double theta, long n_max, double bounded_sup) {
  cplx z = std::polar(1.0, theta);
  return {transfer_growth(s, z, n_max, Side::Plus, bounded_sup), transfer_growth(s, z, n_max, Side::Minus, bounded_sup)};
}

double decay_ratio(const CoefficientSource& s, cplx z, cplx beta, Side side, long n_cap) {
  Vec2 x(1.0 + beta, beta - 1.0);
  std::vector<double> w{x.squaredNorm()};
  const double stop = 1e-10 * w[0];
  double lowest = w[0];
  for (long k = 1; k <= n_cap; ++k) {
    x = side == Side::Plus ? Vec2(gz_step(s, k - 1, z).m * x) : Vec2(gz_step_inverse(s, -k, z) * x);
    const double v = x.squaredNorm();
    if (!std::isfinite(v)) break;
    w.push_back(v);
    lowest = std::min(lowest, v);
    // decayed far enough, or the growing component has taken over
    if (v < stop || v > 1e4 * lowest) break;
  }
  // only the stretch up to the minimum carries decay evidence
  const std::size_t last = std::size_t(std::min_element(w.begin(), w.end()) - w.begin());
  if (last < 16) return std::numeric_limits<double>::infinity();
  const std::size_t mid = last / 2;
  double head = 0, tail = 0;
  for (std::size_t k = 0; k <= last; ++k) (k <= mid ? head : tail) += w[k];
  return tail / head;
}

SpectralClassification classify_point(const CoefficientSource& s, double theta, const ClassifyParams& p) {
  SpectralClassification out;
  out.theta = theta;
  Evidence& ev = out.evidence;

  RadialTrace tr = radial_scan(s, theta, p.r_schedule, p.trunc, p.stab_tol);
  BoundedCheck bc = bounded_transfer_check(s, theta, p.transfer_n, p.bounded_sup);
  ev.bounded_plus = bc.plus.type;
  ev.bounded_minus = bc.minus.type;
  ev.lyap_plus = bc.plus.rate;
  ev.lyap_minus = bc.minus.rate;
  ev.f_plus_limit = tr.f_plus_limit.value;
  ev.m_minus_limit = tr.m_minus_limit.value;
  ev.f_whole_limit = p.whole_scale * tr.f_whole_limit.value;
  out.confidence = tr.f_whole_limit.confidence;

  const long k = tr.last_converged();
  if (k < 0) {
    ev.r_last = -1;
    ev.note = "no converged sample";
    return out;
  }
  long kp = -1;
  for (long j = k - 1; j >= 0; --j)
    if (tr.samples[j].converged && !tr.samples[j].near_pole) {
      kp = j;
      break;
    }
  const CaratheodoryValue& c = tr.samples[k];
  const cplx fp = c.f_plus, mm = c.m_minus;
  const double re = p.whole_scale * c.f_whole.real();
  const double scale = std::max({1.0, std::abs(fp), std::abs(mm)});
  ev.re_f_last = re;
  ev.r_last = tr.r_values[k];

  if (re > p.div_threshold) {
    const bool agree = std::abs(fp - mm) < p.agree_tol * scale;
    const bool imaginary = std::abs(fp.real()) < p.eps_re * std::max(1.0, std::abs(fp));
    const bool both_diverge = std::abs(fp) > p.div_threshold && std::abs(mm) > p.div_threshold;
    if (agree && (imaginary || both_diverge)) {
      out.verdict = Verdict::Singular;
      ev.note = both_diverge ? "Re F diverges; F+ and M- diverge together" : "Re F diverges; F+ = M- on the imaginary axis";
      if (!both_diverge) {
        const cplx z = std::polar(1.0, theta);
        // boundary values at a point of the singular set lie on the imaginary axis;
        // the residual real part is finite-r error and would spoil the decay test
        cplx bp = tr.f_plus_limit.confidence != Confidence::Oscillating ? tr.f_plus_limit.value : fp;
        cplx bm = tr.m_minus_limit.confidence != Confidence::Oscillating ? tr.m_minus_limit.value : mm;
        bp = {0, bp.imag()};
        bm = {0, bm.imag()};
        ev.decay_plus = decay_ratio(s, z, bp, Side::Plus, p.trunc.N_max);
        ev.decay_minus = decay_ratio(s, z, bm, Side::Minus, p.trunc.N_max);
        if (*ev.decay_plus < p.decay_tol && *ev.decay_minus < p.decay_tol) {
          out.verdict = Verdict::PointCandidate;
          ev.note += "; matched solution decays at both ends";
        }
      }
    } else {
      ev.note = "Re F diverges without matching half-line limits";
    }
  } else if (re > p.eps_re) {
    const bool half_ac = fp.real() > p.eps_re || -mm.real() > p.eps_re;
    const bool pole_like = kp >= 0 && re > 1.5 * p.whole_scale * tr.samples[kp].f_whole.real();
    if (half_ac && !pole_like) {
      out.verdict = Verdict::AC;
      ev.note = "Re F finite and positive";
    } else {
      ev.note = pole_like ? "Re F still growing" : "half-line limits near the imaginary axis";
    }
  } else {
    const bool separated = std::abs(fp - mm) > p.gap_sep * scale;
    if (ev.r_last >= p.gap_r_min && separated) {
      out.verdict = Verdict::Gap;
      ev.note = "Re F vanishes with F+ and M- separated";
    } else {
      ev.note = "Re F small but scan too short or limits close";
    }
  }

  if ((out.verdict == Verdict::Singular || out.verdict == Verdict::PointCandidate) &&
      (bc.plus.type == TransferGrowth::Type::Bounded || bc.minus.type == TransferGrowth::Type::Bounded))
    out.coherence_violation = true;
  return out;
}

std::vector<SpectralClassification> classify_thetas(const CoefficientSource& s, const std::vector<double>& thetas,
                                                    const ClassifyParams& p, int jobs) {
  std::vector<SpectralClassification> out(thetas.size());
  std::vector<std::exception_ptr> errs(thetas.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < thetas.size();) {
      try {
        out[i] = classify_point(s, thetas[i], p);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, int(thetas.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<SpectralClassification> classify_grid(const CoefficientSource& s, long count, const ClassifyParams& p,
                                                  int jobs) {
  if (count < 1) throw std::invalid_argument("classify_grid: count must be >= 1");
  std::vector<double> th(count);
  for (long j = 0; j < count; ++j) th[j] = kTwoPi * double(j) / double(count);
  return classify_thetas(s, th, p, jobs);
}

Mat2 normalized_szego(cplx alpha, double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t = 0;
  return szego_matrix(Verblunsky::of(alpha), std::polar(1.0, t)).m * std::polar(1.0, -t / 2);
}

Ellipticity ellipticity_check(const CoefficientSource& s, double theta) {
  const auto* c = std::get_if<Constant>(&s.kind());
  if (!c || s.reflected())
    throw UnsupportedConfigurationError("ellipticity_check: only constant sources have a constant cocycle");
  double t = normalized_szego(c->alpha, theta).trace().real();
  constexpr double tol = 1e-12;
  if (std::abs(t) < 2 - tol) return {Ellipticity::Type::Elliptic, t};
  if (std::abs(t) > 2 + tol) return {Ellipticity::Type::Hyperbolic, t};
  return {Ellipticity::Type::Parabolic, t};
}

ConjugacyResult verify_conjugacy(const CoefficientSource& s, double theta, const std::function<Mat2(double)>& B,
                                 const Mat2& A0, int samples, double tol) {
  if (samples < 1) throw std::invalid_argument("verify_conjugacy: samples must be >= 1");
  std::function<cplx(double)> alpha_of;
  std::function<double(double)> shift;
  if (s.reflected()) throw UnsupportedConfigurationError("verify_conjugacy: reflected sources unsupported");
  if (const auto* c = std::get_if<Constant>(&s.kind())) {
    cplx a = c->alpha;
    alpha_of = [a](double) { return a; };
    shift = [](double w) { return w; };
  } else if (const auto* q = std::get_if<QuasiPeriodic>(&s.kind())) {
    QuasiPeriodic qp = *q;
    alpha_of = [qp](double w) { return std::polar(qp.lambda, kTwoPi * w); };
    shift = [qp](double w) {
      double t = w + qp.beta;
      return t - std::floor(t);
    };
  } else {
    throw UnsupportedConfigurationError("verify_conjugacy: needs a constant or quasi-periodic source");
  }

  ConjugacyResult r;
  for (int j = 0; j < samples; ++j) {
    double w = double(j) / samples;
    Mat2 A = normalized_szego(alpha_of(w), theta);
    double e = norm2(A - B(shift(w)) * A0 * B(w).inverse());
    if (!(e <= r.residual)) {
      r.residual = e;
      r.witness = w;
    }
  }
  Mat2 P = Mat2::Identity();
  for (int n = 1; n <= 10000; ++n) {
    P = A0 * P;
    r.power_bound = std::max(r.power_bound, norm2(P));
    if (!(r.power_bound < 1e12)) break;
  }
  r.trace = std::abs(A0.trace());
  r.verified = r.residual < tol && r.power_bound < 1e6;
  return r;
}

void write_csv(const std::vector<SpectralClassification>& v, std::ostream& os, const std::string& hash) {
  auto prec = os.precision(17);
  os << "theta,verdict,ReF_limit,lyap_plus,lyap_minus,confidence";
  if (!hash.empty()) os << ",config_hash";
  os << '\n';
  for (const auto& c : v) {
    os << c.theta << ',' << to_string(c.verdict) << ',' << c.evidence.f_whole_limit.real() << ','
       << c.evidence.lyap_plus << ',' << c.evidence.lyap_minus << ',' << to_string(c.confidence);
    if (!hash.empty()) os << ',' << hash;
    os << '\n';
  }
  os.precision(prec);
}

void write_jsonl(const std::vector<SpectralClassification>& v, std::ostream& os, const std::string& hash) {
  for (const auto& c : v) {
    const Evidence& e = c.evidence;
    nlohmann::json j = {
        {"theta", c.theta},
        {"verdict", to_string(c.verdict)},
        {"confidence", to_string(c.confidence)},
        {"ReF_limit", num(e.f_whole_limit.real())},
        {"F_limit", {num(e.f_whole_limit.real()), num(e.f_whole_limit.imag())}},
        {"Fplus_limit", {num(e.f_plus_limit.real()), num(e.f_plus_limit.imag())}},
        {"Mminus_limit", {num(e.m_minus_limit.real()), num(e.m_minus_limit.imag())}},
        {"ReF_last", num(e.re_f_last)},
        {"r_last", e.r_last},
        {"lyap_plus", num(e.lyap_plus)},
        {"lyap_minus", num(e.lyap_minus)},
        {"bounded_plus", to_string(e.bounded_plus)},
        {"bounded_minus", to_string(e.bounded_minus)},
        {"decay_plus", e.decay_plus ? num(*e.decay_plus) : nlohmann::json(nullptr)},
        {"decay_minus", e.decay_minus ? num(*e.decay_minus) : nlohmann::json(nullptr)},
        {"coherence_violation", c.coherence_violation},
        {"note", e.note}};
    if (!hash.empty()) j["config_hash"] = hash;
    os << j.dump() << '\n';
  }
}

}  // namespace cmv
