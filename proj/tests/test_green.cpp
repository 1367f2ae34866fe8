#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/SVD>

#include "pseudolab/discretize.hpp"
#include "pseudolab/green.hpp"
#include "pseudolab/linalg.hpp"

using namespace pseudolab;
using Catch::Approx;

namespace {

std::vector<double> sample_points(double a, double b, std::size_t n, double avoid) {
  std::vector<double> xs;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = a + (b - a) * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    if (std::abs(x - avoid) > 1e-9) xs.push_back(x);
  }
  return xs;
}

// ∫_a^b G(x, y) dy by Simpson, split at the kink y = x.
Complex apply_to_one(const GreenKernel& G, double x, double a, double b, int panels) {
  auto simpson = [&](double lo, double hi) {
    const double s = (hi - lo) / panels;
    Complex acc = G(x, lo) + G(x, hi);
    for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * G(x, lo + k * s);
    return acc * s / 3.0;
  };
  return simpson(a, x) + simpson(x, b);
}

}  // namespace

TEST_CASE("textbook kernel of -f'' + f on (0, 1)", "[green]") {
  const Potential zero = parse_potential("0", 0.0, 1.0);
  const GreenKernel G = green_kernel(zero, -1.0, 1.0, Mesh::build(zero, 1e-3));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    double x = u(rng), y = u(rng);
    if (x > y) std::swap(x, y);
    const double exact = -std::sinh(x) * std::sinh(y - 1.0) / std::sinh(1.0);
    CHECK(G(x, y).real() == Approx(exact).epsilon(1e-8));
    CHECK(std::abs(G(x, y).imag()) < 1e-12);
  }
  CHECK(G.wronskian_spread() < 1e-8);
}

TEST_CASE("kernel symmetry and the Wronskian", "[green]") {
  const Potential lin = catalog_potential("linear-i");
  const GreenKernel G = green_kernel(lin, {-1.0, 0.3}, 0.1);
  CHECK(G.wronskian_spread() < 1e-8);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng), y = u(rng);
    CHECK(std::abs(G(x, y) - G(y, x)) <= 1e-10 * std::abs(G(x, y)));
  }
}

TEST_CASE("applying the kernel solves the equation", "[green]") {
  const Potential lin = catalog_potential("linear-i");
  const double h = 0.1;
  const Complex lambda = -1.0;
  const GreenKernel G = green_kernel(lin, lambda, h, Mesh::build(lin, h / 200));
  const double d = h / 20;
  auto f = [&](double x) { return apply_to_one(G, x, -1.0, 1.0, 4000); };
  double worst = 0.0;
  for (double x : {-0.7, -0.31, 0.0, 0.22, 0.55, 0.8}) {
    const Complex f2 = (-f(x + 2 * d) + 16.0 * f(x + d) - 30.0 * f(x) + 16.0 * f(x - d) - f(x - 2 * d)) / (12 * d * d);
    worst = std::max(worst, std::abs(-h * h * f2 + (lin(x) - lambda) * f(x) - 1.0));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("sampled kernel norm matches the matrix resolvent norm", "[green]") {
  const Potential lin = catalog_potential("linear-i");
  const double h = 0.1;
  const Grid g(-1.0, 1.0, 400);
  const GreenKernel G = green_kernel(lin, -1.0, h);
  const auto xs = g.nodes();
  const double kernel_norm = spectral_norm(CMatrix(G.sample(xs) * g.dx())).value;
  const double matrix_norm = resolvent_norm(assemble(lin, h, g), -1.0).value;
  CHECK(kernel_norm == Approx(matrix_norm).epsilon(0.03));
}

TEST_CASE("eigenvalues are refused", "[green][errors]") {
  const Potential zero = catalog_potential("zero");
  CHECK_THROWS_AS(green_kernel(zero, 1.0, 1.0, Mesh::build(zero, 1e-3)), DomainError);
  CHECK_THROWS_AS(rank_one_difference(zero, 6.25, 1.0, std::numbers::pi / 2.5, 1e-3), DomainError);
}

TEST_CASE("rank-one difference against independently built kernels", "[green]") {
  const Potential zero = parse_potential("0", -1.0, 1.0);
  const double h = 0.5, step = h / 200;
  const RankOneKernel r = rank_one_difference(zero, -1.0, h, 0.0, step);
  const SplitGreenKernel S = split_green_kernel(zero, -1.0, h, 0.0, step);
  const GreenKernel G = green_kernel(zero, -1.0, h, Mesh::build(zero, step));
  const auto xs = sample_points(-1.0, 1.0, 41, 0.0);
  const CMatrix diff = S.sample(xs) - G.sample(xs);
  CMatrix model(diff.rows(), diff.cols());
  for (Eigen::Index i = 0; i < model.rows(); ++i)
    for (Eigen::Index j = 0; j < model.cols(); ++j) model(i, j) = r.kernel(xs[i], xs[j]) / (h * h);
  CHECK((diff - model).cwiseAbs().maxCoeff() < 1e-6 * diff.cwiseAbs().maxCoeff());
  CHECK(r.phi(0.0) == Complex(1.0, 0.0));
  CHECK(std::abs(r.kappa - Complex(-0.5 * h * std::tanh(1.0 / h), 0.0)) < 1e-8);
  CHECK(r.resolvent_difference_norm == Approx(r.norm / (h * h)));
}

TEST_CASE("sub-interval Wronskian signs", "[green]") {
  const Potential lin = catalog_potential("linear-i");
  for (double h : {0.2, 0.1, 0.05}) {
    const RankOneKernel r = rank_one_difference(lin, -1.0, h, 0.0, h / 200);
    CHECK(std::abs(ratio(r.wronskian_left, r.wronskian) + 1.0) < 1e-8);
    CHECK(std::abs(ratio(r.wronskian_right, r.wronskian) - 1.0) < 1e-8);
  }
}

TEST_CASE("rank-one norm decays like h^2", "[green]") {
  const Potential lin = catalog_potential("linear-i");
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025}, norms;
  for (double h : hs) norms.push_back(rank_one_difference(lin, -1.0, h, 0.0, h / 200).norm);
  const double s = loglog_slope(hs, norms);
  CHECK(s >= 1.8);
  CHECK(s <= 2.2);
}

TEST_CASE("sampled difference kernels have numerical rank one", "[green][property]") {
  struct Triple {
    Potential V;
    Complex lambda;
    double h, cut;
  };
  const std::vector<Triple> triples{{catalog_potential("zero"), -1.0, 0.5, 1.3},
                                    {catalog_potential("linear-i"), -1.0, 0.1, 0.0},
                                    {catalog_potential("linear-i"), {0.5, 0.2}, 0.1, -0.3},
                                    {catalog_potential("example-t5"), 1.0, 0.1, 0.3},
                                    {catalog_potential("example-t5"), -1.0, 0.2, 0.0}};
  for (const auto& t : triples) {
    const double step = t.h / 400;
    const SplitGreenKernel S = split_green_kernel(t.V, t.lambda, t.h, t.cut, step);
    const GreenKernel G = green_kernel(t.V, t.lambda, t.h, Mesh::build(t.V, step));
    const auto xs = sample_points(t.V.a(), t.V.b(), 60, t.cut);
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(CMatrix(S.sample(xs) - G.sample(xs))).singularValues();
    INFO(t.V.describe() << " λ=" << t.lambda << " h=" << t.h << " s1=" << s(0) << " s2=" << s(1));
    CHECK(s(1) <= 1e-8 * s(0));
  }
}

TEST_CASE("split bound chain", "[green][property]") {
  const Potential lin = catalog_potential("linear-i");
  const double h = 0.1;
  const Grid g(-1.0, 1.0, 399);
  const double cut[] = {0.0};
  const OperatorMatrix S = assemble_split(lin, h, g, cut);
  const OperatorMatrix A = assemble(lin, h, g);
  for (Complex l : {Complex(-0.5, 0.0), Complex(-0.2, 1.5), Complex(0.3, -1.4)}) {
    const double rhs = std::max(1.0 / dist_to_conv_phi(l, build_phi_region(lin.restricted(-1.0, 0.0))),
                                1.0 / dist_to_conv_phi(l, build_phi_region(lin.restricted(0.0, 1.0))));
    const double split = resolvent_norm(S, l).value;
    CHECK(split <= rhs);
    const RankOneKernel r = rank_one_difference(lin, l, h, 0.0);
    CHECK(resolvent_norm(A, l).value <= split + r.resolvent_difference_norm + 1e-6);
  }
}

TEST_CASE("shooting recovers the Dirichlet spectrum", "[green]") {
  ShootingOptions opts;
  opts.max_step = 1e-3;
  const auto roots = shooting_eigenvalues(catalog_potential("zero"), 1.0, 0.5, 10.0, 0, opts);
  REQUIRE(roots.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const double j = static_cast<double>(k + 1);
    CHECK(std::abs(roots[k].lambda - Complex(j * j, 0.0)) < 1e-8);
  }
  CHECK_THROWS_AS(shooting_eigenvalues(catalog_potential("zero"), 1.0, 1.5, 3.5, 0, opts), DomainError);
  std::ostringstream os;
  write_eigen_csv(os, roots);
  CHECK(os.str().rfind("re,im,abs_miss,h\n", 0) == 0);
}

TEST_CASE("example t5 has real positive eigenvalues", "[green]") {
  const auto roots = shooting_eigenvalues(catalog_potential("example-t5"), 0.1, 0.0, 12.0, 3);
  REQUIRE(roots.size() == 3);
  for (const auto& r : roots) {
    CHECK(std::abs(r.lambda.imag()) < 1e-6);
    CHECK(r.lambda.real() > 0.0);
  }
  CHECK(roots[0].lambda.real() == Approx(7.29777).epsilon(1e-5));
}
