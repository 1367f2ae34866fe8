#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "pseudolab/green.hpp"
#include "pseudolab/linalg.hpp"
#include "pseudolab/wkb.hpp"

using namespace pseudolab;
using Catch::Approx;

namespace {

// Adaptive Gauss-Kronrod (7/15) with interval bisection.
Complex gauss_kronrod(const std::function<Complex(double)>& f, double a, double b, double tol, int depth = 0) {
  static const double xk[] = {0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
                              0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
  static const double wk[] = {0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
                              0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
  static const double wg[] = {0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  Complex k = wk[7] * f(c), g = wg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const Complex s = f(c - r * xk[i]) + f(c + r * xk[i]);
    k += wk[i] * s;
    if (i % 2 == 1) g += wg[i / 2] * s;
  }
  k *= r;
  g *= r;
  if (std::abs(k - g) <= tol || depth > 40) return k;
  return gauss_kronrod(f, a, c, tol / 2, depth + 1) + gauss_kronrod(f, c, b, tol / 2, depth + 1);
}

}  // namespace

TEST_CASE("principal branch", "[wkb]") {
  const Potential zero = parse_potential("0", -1.0, 1.0);
  const Mesh mz = Mesh::build(zero, 0.01);
  for (Complex s : branch_sqrt(zero, -1.0, mz)) CHECK(s == Complex(1.0, 0.0));

  const Potential lin = catalog_potential("linear-i");
  const Mesh ml = Mesh::build(lin, 0.01);
  const auto s = branch_sqrt(lin, -1.0, ml);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s[k].real() > 0.0);
    CHECK(std::abs(s[k] - std::sqrt(ml.potential(lin, k) + 1.0)) < 1e-14);
    CHECK(std::abs(s[k] - std::sqrt(Complex(1.0, ml.x(k)))) < 1e-8);
  }
  CHECK_THROWS_AS(branch_sqrt(lin, {0.0, 0.5}, ml), DomainError);
  CHECK_THROWS_AS(branch_sqrt(lin, {2.0, 0.0}, ml), DomainError);
}

TEST_CASE("q avoids the negative axis whenever λ is outside Φ", "[wkb][property]") {
  for (const char* name : {"zero", "linear-i", "example-t5"}) {
    const Potential V = catalog_potential(name);
    const PhiRegion region = build_phi_region(V);
    const Mesh mesh = Mesh::build(V, 0.01);
    for (Complex l : {Complex(-1, 0), Complex(-0.3, 2), Complex(1, 2), Complex(2, -1.8), Complex(-0.1, -0.1)}) {
      if (!(dist_to_phi(l, region) > region.radius())) continue;
      INFO(name << " λ=" << l);
      for (Complex q : q_samples(V, l, mesh)) CHECK((q.imag() != 0.0 || q.real() > 0.0));
      const auto xi = eikonal(branch_sqrt(V, l, mesh), mesh);
      for (std::size_t k = 1; k < xi.size(); ++k)
        if (mesh.x(k) > mesh.x(k - 1)) CHECK(xi[k].real() > xi[k - 1].real());
    }
  }
}

TEST_CASE("eikonal integrals", "[wkb]") {
  const Potential zero = parse_potential("0", -1.0, 1.0);
  const Mesh m = Mesh::build(zero, 0.01);
  const auto xi = eikonal(branch_sqrt(zero, -1.0, m), m);
  for (std::size_t k = 0; k < m.size(); ++k) CHECK(xi[k].real() == Approx(m.x(k) + 1.0).margin(1e-14));

  const std::vector<Complex> slope(m.size(), Complex(0.5, 2.0));
  const auto lin_xi = eikonal(slope, m);
  CHECK(std::abs(lin_xi.back() - Complex(0.5, 2.0) * 2.0) < 1e-13);
  const std::vector<Complex> bad(m.size(), Complex(-0.5, 2.0));
  CHECK_THROWS_AS(eikonal(bad, m), DomainError);

  const Potential lin = catalog_potential("linear-i");
  const Mesh ml = Mesh::build(lin, 1e-3);
  const auto xl = eikonal(branch_sqrt(lin, -1.0, ml), ml);
  const Complex oracle = gauss_kronrod([](double x) { return std::sqrt(Complex(1.0, x)); }, -1.0, 1.0, 1e-14);
  CHECK(std::abs(xl.back() - xl.front() - oracle) < 1e-10);
}

TEST_CASE("WKB pair", "[wkb]") {
  const Potential zero = parse_potential("0", -1.0, 1.0);
  const WkbPair z = wkb_pair(zero, -1.0, 0.1);
  for (std::size_t k = 0; k < z.y2.mesh.size(); k += 7) {
    const double x = z.y2.mesh.x(k);
    CHECK(z.y2.value(k).value().real() == Approx(std::exp(-(x + 1.0) / 0.1)).epsilon(1e-12));
    CHECK(z.y2.derivative(k).value().real() == Approx(-10.0 * std::exp(-(x + 1.0) / 0.1)).epsilon(1e-12));
  }

  for (double h : {0.1, 0.01}) {
    const WkbPair p = wkb_pair(catalog_potential("linear-i"), -1.0, h);
    for (std::size_t k = 0; k < p.y1.mesh.size(); ++k) {
      const ScaledValue w = p.y2.value(k) * p.y1.derivative(k) - p.y1.value(k) * p.y2.derivative(k);
      CHECK(std::abs(w.value() * h / 2.0 - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS_AS(wkb_pair(catalog_potential("linear-i"), -1.0, 0.001), DomainError);
}

TEST_CASE("WKB error is O(h)", "[wkb][property]") {
  const std::vector<Potential> cases{catalog_potential("zero"), catalog_potential("linear-i"),
                                     catalog_potential("example-t5").restricted(-1.0, 0.0),
                                     catalog_potential("example-t5").restricted(0.0, 1.0)};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const double e1 = wkb_relative_error(cases[c], -1.0, 0.04), e2 = wkb_relative_error(cases[c], -1.0, 0.02);
    INFO("case " << c << " errors " << e1 << " " << e2);
    if (c == 0) {
      CHECK(e1 < 1e-4);
      continue;
    }
    CHECK(e1 / e2 == Approx(2.0).epsilon(0.2));
  }
  const double a = wkb_relative_error(catalog_potential("linear-i"), -1.0, 0.02);
  const double b = wkb_relative_error(catalog_potential("linear-i"), -1.0, 0.01);
  CHECK(a / b >= 1.6);
  CHECK(a / b <= 2.4);
}

TEST_CASE("error-control integral", "[wkb]") {
  CHECK(error_control_integral(parse_potential("3+i", -1.0, 1.0), -1.0) == 0.0);

  const Potential lin = catalog_potential("linear-i");
  ErrorControlOptions fine;
  fine.spacing_factor = 0.5e-5;
  const double i1 = error_control_integral(lin, -1.0), i2 = error_control_integral(lin, -1.0, fine);
  CHECK(std::isfinite(i1));
  CHECK(std::abs(i1 - i2) / i1 < 1e-6);

  ErrorControlOptions exact;
  exact.closed_forms.push_back({[](double) { return Complex(0.0, 1.0); }, [](double) { return Complex(0.0, 0.0); }});
  CHECK(error_control_integral(lin, -1.0, exact) == Approx(i1).epsilon(1e-6));

  double prev = 0.0;
  for (double d : {0.5, 0.25, 0.125}) {
    const double v = error_control_integral(lin, -d);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("sinh collapse threshold", "[wkb]") {
  for (Complex z : {Complex(kSinhCollapse, 0), Complex(kSinhCollapse, 3.0), Complex(8.0, -1.0)}) {
    CHECK(sinh_collapse_error(z) < 1e-4);
    CHECK(sinh_collapse_error(z) == Approx(std::abs(2.0 * std::sinh(z) - std::exp(z)) / std::abs(std::exp(z))));
  }
  CHECK(sinh_collapse_error(Complex(2.0, 0.0)) > 1e-4);
}

TEST_CASE("asymptotic rank-one constants", "[wkb]") {
  const Potential zero = parse_potential("0", -1.0, 1.0);
  const AsymptoticConstants c = asymptotic_constants(zero, -1.0, 0.05, 0.0);
  CHECK(std::abs(c.kappa - Complex(-0.025, 0.0)) < 1e-15);
  CHECK(c.phi_norm_sq == Approx(0.05));
  CHECK(c.product == Approx(0.05 * 0.05 / 2));
  CHECK(c.phi_norm_sq_profile == Approx(0.05).epsilon(1e-3));
  CHECK_THROWS_AS(asymptotic_constants(zero, -1.0, 0.5, 0.0), DomainError);

  const Potential lin = catalog_potential("linear-i");
  std::vector<double> hs{0.1, 0.05, 0.025, 0.0125}, prod;
  for (double h : hs) prod.push_back(asymptotic_constants(lin, -1.0, h, 0.0).product);
  CHECK(loglog_slope(hs, prod) == Approx(2.0).epsilon(0.05));

  const double h = 0.0125;
  const RankOneKernel exact = rank_one_difference(lin, -1.0, h, 0.0, h / 200);
  const AsymptoticConstants est = asymptotic_constants(lin, -1.0, h, 0.0);
  CHECK(est.product == Approx(exact.norm).epsilon(0.15));
  CHECK(std::abs(est.kappa - exact.kappa) / std::abs(exact.kappa) < 0.15);

  const auto rows = wkb_sweep(lin, -1.0, 0.0, hs);
  std::ostringstream os;
  write_wkb_csv(os, rows);
  CHECK(os.str().rfind("h,max_rel_err_y2,kappa,phi_norm_sq,product\n", 0) == 0);
}
