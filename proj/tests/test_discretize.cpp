#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pseudolab/discretize.hpp"
#include "pseudolab/linalg.hpp"

using namespace pseudolab;
using Catch::Approx;

namespace {

std::vector<double> sorted_real_eigenvalues(const CMatrix& A) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return ev;
}

}  // namespace

TEST_CASE("grid layout", "[discretize]") {
  const Grid g(0.0, 1.0, 9);
  CHECK(g.dx() == Approx(0.1));
  CHECK(g.node(0) == Approx(0.1));
  CHECK(g.node(8) == Approx(0.9));
  CHECK(g.nearest(0.52) == 4);
  CHECK(Grid::with_max_spacing(0.0, 1.0, 0.1).dx() <= 0.1);
  CHECK_THROWS(Grid(1.0, 0.0, 4));
}

TEST_CASE("free Dirichlet Laplacian", "[discretize]") {
  const Potential zero = catalog_potential("zero");
  const OperatorMatrix A = assemble(zero, 1.0, Grid(0.0, std::numbers::pi, 199));
  CHECK(sorted_real_eigenvalues(A.entries).front() == Approx(1.0).epsilon(1e-3));

  const Potential c5 = parse_potential("5*i", 0.0, 1.0);
  const Grid g(0.0, 1.0, 30);
  const OperatorMatrix B = assemble(c5, 0.3, g);
  const CMatrix expected = free_laplacian(g, 0.3) + Complex(0.0, 5.0) * CMatrix::Identity(30, 30);
  CHECK((B.entries - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stencil entries and bandwidth", "[discretize]") {
  const Potential V = catalog_potential("linear-i");
  const Grid g(-1.0, 1.0, 50);
  const OperatorMatrix A = assemble(V, 0.2, g);
  const double s = 0.04 / (g.dx() * g.dx());
  for (Eigen::Index i = 0; i < 50; ++i)
    for (Eigen::Index j = 0; j < 50; ++j) {
      const Complex a = A.entries(i, j);
      if (i == j) CHECK(std::abs(a - (2.0 * s + Complex(0.0, g.node(i)))) < 1e-12);
      else if (std::abs(i - j) == 1) CHECK(std::abs(a + s) < 1e-12 * s);
      else CHECK(a == Complex(0.0, 0.0));
    }
}

TEST_CASE("Hermitian part respects k_lower", "[discretize]") {
  const OperatorMatrix A = assemble(catalog_potential("linear-i"), 0.1, Grid(-1.0, 1.0, 400));
  CHECK(hermitian_part_min_eigenvalue(A.entries) >= -1e-10);
}

TEST_CASE("second-order eigenvalue convergence", "[discretize][property]") {
  const Potential zero = catalog_potential("zero");
  std::vector<double> dx, err;
  for (std::size_t n : {49, 99, 199}) {
    const Grid g(0.0, std::numbers::pi, n);
    const auto ev = sorted_real_eigenvalues(assemble(zero, 1.0, g).entries);
    dx.push_back(g.dx());
    err.push_back(std::abs(ev[2] - 9.0));
  }
  CHECK(loglog_slope(dx, err) == Approx(2.0).margin(0.05));
}

TEST_CASE("grid nodes on a partition point are rejected", "[discretize][errors]") {
  CHECK_THROWS_AS(assemble(catalog_potential("example-t5"), 0.1, Grid(-1.0, 1.0, 9)), DomainError);
  CHECK_NOTHROW(assemble(catalog_potential("example-t5"), 0.1, Grid(-1.0, 1.0, 10)));
}

TEST_CASE("split assembly", "[discretize]") {
  const Potential lin = catalog_potential("linear-i");
  const Grid g(-1.0, 1.0, 60);
  const OperatorMatrix A = assemble(lin, 0.1, g);
  const OperatorMatrix S0 = assemble_split(lin, 0.1, g, {});
  CHECK(S0.entries == A.entries);

  const Potential zero = parse_potential("0", -1.0, 1.0);
  const double cut[] = {0.0};
  const OperatorMatrix S = assemble_split(zero, 1.0, Grid(-1.0, 1.0, 399), cut);
  CHECK(S.dim() == 398);
  REQUIRE(S.blocks().size() == 2);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(sorted_real_eigenvalues(S.block(k)).front() == Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-2));
  const auto [f0, l0] = S.blocks()[0];
  const auto [f1, l1] = S.blocks()[1];
  CHECK(S.entries.block(f0, f1, l0 - f0, l1 - f1).cwiseAbs().maxCoeff() == 0.0);

  const double twice[] = {0.0, 0.001};
  CHECK_THROWS_AS(assemble_split(zero, 1.0, Grid(-1.0, 1.0, 20), twice), DomainError);
}

TEST_CASE("split resolvent is the largest block resolvent", "[discretize]") {
  const Potential lin = catalog_potential("linear-i");
  const double cut[] = {0.0};
  const OperatorMatrix S = assemble_split(lin, 0.1, Grid(-1.0, 1.0, 120), cut);
  for (Complex l : {Complex(-0.5, 0.0), Complex(0.5, 0.2), Complex(1.0, -0.7)}) {
    double worst = 0.0;
    for (std::size_t k = 0; k < S.blocks().size(); ++k) worst = std::max(worst, resolvent_norm(S.block(k), l).value);
    CHECK(resolvent_norm(S.entries, l).value == Approx(worst).epsilon(1e-9));
  }
}

TEST_CASE("numerical range lies in conv(V samples) + [0, 4h^2/dx^2]", "[discretize][property]") {
  const Potential V = catalog_potential("example-t5");
  const Grid g(-1.0, 1.0, 80);
  const double h = 0.1;
  const OperatorMatrix A = assemble(V, h, g);
  const auto vals = node_values(V, g);
  double re_lo = 1e300, re_hi = -1e300, im_lo = 1e300, im_hi = -1e300;
  for (Complex v : vals) {
    re_lo = std::min(re_lo, v.real());
    re_hi = std::max(re_hi, v.real());
    im_lo = std::min(im_lo, v.imag());
    im_hi = std::max(im_hi, v.imag());
  }
  const double spread = 4.0 * h * h / (g.dx() * g.dx());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 1000; ++k) {
    CVector f(80);
    for (auto& z : f) z = {n01(rng), n01(rng)};
    f.normalize();
    const Complex r = f.dot(A.entries * f);
    CHECK(r.real() >= re_lo - 1e-12);
    CHECK(r.real() <= re_hi + spread + 1e-12);
    CHECK(r.imag() >= im_lo - 1e-12);
    CHECK(r.imag() <= im_hi + 1e-12);
  }
}

TEST_CASE("matrix dump round-trip", "[discretize]") {
  const OperatorMatrix A = assemble(catalog_potential("linear-i"), 0.1, Grid(-1.0, 1.0, 7));
  std::stringstream ss;
  write_matrix_dump(ss, A);
  const MatrixDump d = read_matrix_dump(ss);
  CHECK(d.dim == 7);
  CHECK(d.h == 0.1);
  CHECK(d.a == -1.0);
  CHECK(d.entries == A.entries);
}
