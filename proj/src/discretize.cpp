#include "pseudolab/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pseudolab {

Grid::Grid(double a, double b, std::size_t n_interior) : a_(a), b_(b), n_(n_interior) {
  if (!(a < b)) throw DomainError("grid needs a < b");
  if (n_interior == 0) throw DomainError("grid needs at least one interior node");
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t j = 0; j < n_; ++j) xs[j] = node(j);
  return xs;
}

std::size_t Grid::nearest(double x) const {
  const double t = std::round((x - a_) / dx()) - 1.0;
  return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(n_ - 1)));
}

Grid Grid::with_max_spacing(double a, double b, double max_dx) {
  const auto cells = static_cast<std::size_t>(std::ceil((b - a) / max_dx - 1e-12));
  return Grid(a, b, std::max<std::size_t>(cells, 2) - 1);
}

std::vector<std::pair<std::size_t, std::size_t>> OperatorMatrix::blocks() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t first = 0;
  for (std::size_t r = 1; r <= kept_nodes.size(); ++r) {
    if (r == kept_nodes.size() || kept_nodes[r] != kept_nodes[r - 1] + 1) {
      out.emplace_back(first, r);
      first = r;
    }
  }
  return out;
}

CMatrix OperatorMatrix::block(std::size_t k) const {
  const auto [first, last] = blocks().at(k);
  const auto n = static_cast<Eigen::Index>(last - first);
  return entries.block(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(first), n, n);
}

CMatrix free_laplacian(const Grid& grid, double h) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double s = h * h / (grid.dx() * grid.dx());
  CMatrix L = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    L(j, j) = 2.0 * s;
    if (j > 0) L(j, j - 1) = -s;
    if (j + 1 < n) L(j, j + 1) = -s;
  }
  return L;
}

std::vector<Complex> node_values(const Potential& V, const Grid& grid) {
  if (grid.a() < V.a() || grid.b() > V.b()) throw DomainError("grid extends beyond the potential's interval");
  const double tol = 1e-12 * V.length();
  std::vector<Complex> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (V.near_partition_point(x, tol)) {
      std::ostringstream msg;
      msg << "grid node " << j << " at x = " << x
          << " coincides with a partition point of V; offset the grid (change the node count)";
      throw DomainError(msg.str());
    }
    out[j] = V(x);
  }
  return out;
}

OperatorMatrix assemble(const Potential& V, double h, const Grid& grid) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const auto values = node_values(V, grid);
  OperatorMatrix A;
  A.entries = free_laplacian(grid, h);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    A.entries(k, k) += values[j];
  }
  A.h = h;
  A.grid = grid;
  A.kept_nodes.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) A.kept_nodes[j] = j;
  return A;
}

OperatorMatrix assemble_split(const Potential& V, double h, const Grid& grid, std::span<const double> cuts) {
  OperatorMatrix full = assemble(V, h, grid);
  if (cuts.empty()) return full;

  std::vector<std::size_t> removed;
  for (double c : cuts) {
    if (!(c > grid.a() && c < grid.b())) throw DomainError("cut must lie strictly inside (a, b)");
    removed.push_back(grid.nearest(c));
  }
  std::sort(removed.begin(), removed.end());
  if (std::adjacent_find(removed.begin(), removed.end()) != removed.end())
    throw DomainError("two cuts snap to the same grid node; refine the grid");

  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (!std::binary_search(removed.begin(), removed.end(), j)) kept.push_back(j);

  const auto m = static_cast<Eigen::Index>(kept.size());
  OperatorMatrix A;
  A.entries.resize(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c)
      A.entries(r, c) = full.entries(static_cast<Eigen::Index>(kept[r]), static_cast<Eigen::Index>(kept[c]));
  A.h = h;
  A.grid = grid;
  A.interior_dirichlet = std::move(removed);
  A.kept_nodes = std::move(kept);
  return A;
}

double hermitian_part_min_eigenvalue(const CMatrix& A) {
  const CMatrix herm = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void write_matrix_dump(std::ostream& os, const OperatorMatrix& A) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "dim=%zu ", A.dim());
  os << buf;
  std::snprintf(buf, sizeof buf, "h=%.17g dx=%.17g ", A.h, A.grid.dx());
  os << buf;
  std::snprintf(buf, sizeof buf, "a=%.17g b=%.17g\n", A.grid.a(), A.grid.b());
  os << buf;
  for (Eigen::Index r = 0; r < A.entries.rows(); ++r) {
    for (Eigen::Index c = 0; c < A.entries.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%s%.17g %.17g", c ? " " : "", A.entries(r, c).real(), A.entries(r, c).imag());
      os << buf;
    }
    os << '\n';
  }
}

MatrixDump read_matrix_dump(std::istream& is) {
  MatrixDump d;
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("empty matrix dump");
  std::istringstream hs(header);
  std::string field;
  int seen = 0;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed dump header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "dim") d.dim = std::stoul(val);
    else if (key == "h") d.h = std::stod(val);
    else if (key == "dx") d.dx = std::stod(val);
    else if (key == "a") d.a = std::stod(val);
    else if (key == "b") d.b = std::stod(val);
    else throw std::runtime_error("unknown dump header key '" + key + "'");
    ++seen;
  }
  if (seen != 5) throw std::runtime_error("dump header needs dim, h, dx, a, b");
  const auto n = static_cast<Eigen::Index>(d.dim);
  d.entries.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      double re, im;
      if (!(is >> re >> im)) throw std::runtime_error("truncated matrix dump");
      d.entries(r, c) = {re, im};
    }
  return d;
}

}  // namespace pseudolab
