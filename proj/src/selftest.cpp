#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "cmvsub/runner.hpp"

namespace cmv {

namespace {

struct Check {
  const char* name;
  double tol;
  std::function<double()> residual;
};

cplx zpow(cplx z, long k) { return std::pow(z, double(k)); }

}  // namespace

int run_selftest(const SelftestOptions& o, std::ostream& out) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(0, 1);
  auto disk = [&](double r0) { return std::polar(r0 * std::sqrt(U(rng)), 2 * std::numbers::pi * U(rng)); };
  auto circle = [&] { return std::polar(1.0, 2 * std::numbers::pi * U(rng)); };
  const CoefficientSource rnd = RandomIID{11, 0.5};

  std::vector<Check> checks{
      {"determinant", 1e-13,
       [&] {
         double worst = 0;
         for (int k = 0; k < 200; ++k) {
           Verblunsky a = Verblunsky::of(disk(0.95));
           cplx z = circle();
           Mat2 S = szego_matrix(a, z).m;
           if (o.flip_szego_sign) S(0, 1) = -S(0, 1);
           worst = std::max(worst, std::abs(S.determinant() - z));
           worst = std::max(worst, std::abs(gz_matrix(a, z, Parity::Even).m.determinant() + 1.0));
           worst = std::max(worst, std::abs(gz_matrix(a, z, Parity::Odd).m.determinant() + 1.0));
         }
         return worst;
       }},
      {"theta_unitary", 1e-14,
       [&] {
         double worst = 0;
         for (int k = 0; k < 200; ++k) {
           Mat2 t = theta_block(disk(0.99));
           worst = std::max(worst, (t * t.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff());
         }
         return worst;
       }},
      {"wronskian", 1e-11,
       [&] {
         cplx z = circle();
         SolutionTrack u = gz_track(rnd, z, Side::Plus, Kind::First, 30);
         SolutionTrack p = gz_track(rnd, z, Side::Plus, Kind::Second, 30);
         double worst = 0;
         for (long n = 0; n <= 30; ++n) {
           cplx w = u.at(n)(0) * p.at(n)(1) - p.at(n)(0) * u.at(n)(1);
           worst = std::max(worst, std::abs(std::abs(w) - 2.0));
         }
         return worst;
       }},
      {"gz_szego", 1e-10,
       [&] {
         cplx z = circle();
         SolutionTrack u = gz_track(rnd, z, Side::Plus, Kind::First, 30);
         SolutionTrack p = gz_track(rnd, z, Side::Plus, Kind::Second, 30);
         SolutionTrack phi = polynomials(rnd, z, 30, Kind::First);
         SolutionTrack psi = polynomials(rnd, z, 30, Kind::Second);
         double worst = 0;
         for (long n = 0; n <= 30; ++n) {
           cplx f = phi.at(n)(0), fs = phi.at(n)(1), g = psi.at(n)(0), gs = -psi.at(n)(1);
           Vec2 eu, ep;
           if (n % 2 == 0) {
             cplx c = zpow(z, -n / 2);
             eu << c * f, c * fs;
             ep << c * g, -c * gs;
           } else {
             cplx a = zpow(z, -(n + 1) / 2), b = zpow(z, -(n - 1) / 2);
             eu << a * fs, b * f;
             ep << -a * gs, b * g;
           }
           worst = std::max({worst, (u.at(n) - eu).cwiseAbs().maxCoeff(), (p.at(n) - ep).cwiseAbs().maxCoeff()});
         }
         return worst;
       }},
      {"reflection", 1e-11,
       [&] {
         cplx z = circle();
         CoefficientSource rs = reflect(rnd);
         SolutionTrack um = gz_track(rnd, z, Side::Minus, Kind::First, 40);
         SolutionTrack pm = gz_track(rnd, z, Side::Minus, Kind::Second, 40);
         SolutionTrack ut = gz_track(rs, z, Side::Plus, Kind::First, 40);
         SolutionTrack pt = gz_track(rs, z, Side::Plus, Kind::Second, 40);
         double worst = 0;
         for (long n = 0; n <= 40; ++n)
           worst = std::max({worst, (um.at(-n - 1) + pt.at(n)).cwiseAbs().maxCoeff(),
                             (pm.at(-n - 1) - ut.at(n)).cwiseAbs().maxCoeff()});
         return worst;
       }},
      {"unitarity", 1e-12,
       [&] {
         return std::max(build_half_line_plus(rnd, 64, circle()).matrix.unitarity_residual(),
                         build_extended(rnd, -64, 64, circle(), circle()).matrix.unitarity_residual());
       }},
      {"lm_factorization", 1e-13,
       [&] {
         LMFactors f = lm_factorize(rnd, -32, 33);
         TruncatedOperator e = build_extended(rnd, -32, 33);
         return ((f.L * f.M).dense() - e.matrix.dense()).cwiseAbs().maxCoeff();
       }},
      {"free_oracle", 1e-6,
       [&] {
         const CoefficientSource free = free_source();
         cplx z = std::polar(0.9, 0.3);
         double a = std::abs(2.0 * f_whole(free, z, 256).value - f_whole_oracle(free, z, -128, 129));
         double b = std::abs(f_plus(free, z, 256) - 1.0);
         return std::max(a, b);
       }},
  };

  auto prec = out.precision(3);
  bool ok = true;
  for (const auto& c : checks) {
    double r;
    try {
      r = c.residual();
    } catch (const std::exception& e) {
      out << "FAIL " << c.name << " (" << e.what() << ")\n";
      ok = false;
      continue;
    }
    bool pass = r < c.tol;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << c.name << " residual=" << std::scientific << r << " tol=" << c.tol
        << std::defaultfloat << '\n';
  }
  out.precision(prec);
  return ok ? kExitOk : kExitFailure;
}

}  // namespace cmv
