#pragma once

/// @file discretize.hpp
/// @brief Dense finite-difference matrices for -h^2 d^2/dx^2 + V with
/// Dirichlet conditions.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "pseudolab/potential.hpp"
#include "pseudolab/types.hpp"

namespace pseudolab {

/// Uniform grid of interior nodes x_j = a + (j + 1) dx, j = 0 .. n-1.
class Grid {
public:
  Grid(double a, double b, std::size_t n_interior);

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t size() const { return n_; }
  double dx() const { return (b_ - a_) / static_cast<double>(n_ + 1); }
  double node(std::size_t j) const { return a_ + static_cast<double>(j + 1) * dx(); }
  std::vector<double> nodes() const;
  /// Index of the node closest to x.
  std::size_t nearest(double x) const;

  /// Smallest grid on (a, b) with spacing at most max_dx.
  static Grid with_max_spacing(double a, double b, double max_dx);

private:
  double a_, b_;
  std::size_t n_;
};

struct OperatorMatrix {
  CMatrix entries;
  double h = 0.0;
  Grid grid{0.0, 1.0, 1};
  /// Grid node indices removed by interior Dirichlet conditions, ascending.
  std::vector<std::size_t> interior_dirichlet;
  /// Grid node index of each retained row.
  std::vector<std::size_t> kept_nodes;

  std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
  /// Row ranges [first, last) of the decoupled diagonal blocks.
  std::vector<std::pair<std::size_t, std::size_t>> blocks() const;
  CMatrix block(std::size_t k) const;
};

/// Second-difference matrix of -h^2 d^2/dx^2 with Dirichlet truncation.
CMatrix free_laplacian(const Grid& grid, double h);

/// Tridiagonal stencil of -h^2 d^2/dx^2 + V. Rejects grids with a node on a
/// partition point of V.
OperatorMatrix assemble(const Potential& V, double h, const Grid& grid);

/// As assemble, with the nodes nearest to each cut deleted.
OperatorMatrix assemble_split(const Potential& V, double h, const Grid& grid, std::span<const double> cuts);

/// Potential values at the grid nodes (with the partition-point check).
std::vector<Complex> node_values(const Potential& V, const Grid& grid);

/// Smallest eigenvalue of the Hermitian part (A + A^*)/2.
double hermitian_part_min_eigenvalue(const CMatrix& A);

/// Header line "dim=N h=H dx=DX a=A b=B", then one line per row of
/// space-separated "re im" pairs.
void write_matrix_dump(std::ostream& os, const OperatorMatrix& A);
struct MatrixDump {
  std::size_t dim = 0;
  double h = 0.0, dx = 0.0, a = 0.0, b = 0.0;
  CMatrix entries;
};
MatrixDump read_matrix_dump(std::istream& is);

}  // namespace pseudolab
