#pragma once

/// @file linalg.hpp
/// @brief Dense complex kernels: LU, resolvent norms by inverse iteration,
/// spectral norms, and pseudospectra maps over a grid of λ.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "pseudolab/discretize.hpp"
#include "pseudolab/types.hpp"

namespace pseudolab {

/// Partial-pivoting factorisation P A = L U.
class LuFactors {
public:
  explicit LuFactors(const CMatrix& A);

  /// Set when a pivot has magnitude below 1e-14 * max|A_ij|.
  bool singular() const { return singular_; }
  /// Reciprocal condition estimate in the 1-norm.
  double rcond() const { return rcond_; }

  CVector solve(const CVector& b) const;
  /// Solves A^* x = b.
  CVector adjoint_solve(const CVector& b) const;

  CMatrix lower() const;
  CMatrix upper() const;
  CMatrix permutation() const;

private:
  Eigen::PartialPivLU<CMatrix> lu_;
  CMatrix lu_adjoint_;
  bool singular_ = false;
  double rcond_ = 0.0;
};

LuFactors lu_factor(const CMatrix& A);

struct NormEstimate {
  double value = 0.0;
  /// λ hit the spectrum (singular factorisation); value is +inf.
  bool infinite = false;
  bool converged = true;
  /// Iteration stalled and σ_min came from a full SVD instead.
  bool direct = false;
  int iterations = 0;
};

inline constexpr std::uint64_t kDefaultSeed = 0x5eed5eedULL;

/// ||(A - λ)^{-1}|| = 1 / σ_min(A - λ) by inverse iteration on
/// (A - λ)(A - λ)^* through one LU. After 100 iterations without convergence
/// σ_min comes from a full SVD (direct = true) when n ≤ 1200; larger
/// matrices return the best estimate with converged = false.
NormEstimate resolvent_norm(const CMatrix& A, Complex lambda, double tol = 1e-12,
                            std::uint64_t seed = kDefaultSeed);
inline NormEstimate resolvent_norm(const OperatorMatrix& A, Complex lambda, double tol = 1e-12) {
  return resolvent_norm(A.entries, lambda, tol);
}

/// Largest singular value by power iteration on A^* A.
NormEstimate spectral_norm(const CMatrix& A, double tol = 1e-10, std::uint64_t seed = kDefaultSeed);
NormEstimate spectral_norm(const CSparse& A, double tol = 1e-10, std::uint64_t seed = kDefaultSeed);

using LinearMap = std::function<CVector(const CVector&)>;
/// Power iteration for an operator given by its action and its adjoint's.
NormEstimate operator_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index cols,
                           double tol = 1e-10, std::uint64_t seed = kDefaultSeed);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Deterministic unit start vector.
CVector seeded_unit_vector(Eigen::Index n, std::uint64_t seed);

struct LambdaGrid {
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
  std::size_t nx = 1, ny = 1;

  std::size_t size() const { return nx * ny; }
  /// Point ix + nx * iy; iy = 0 is the bottom row (im_min).
  Complex point(std::size_t ix, std::size_t iy) const;
  void validate() const;
};

struct ResolventMap {
  LambdaGrid grid;
  /// log10 of the resolvent norm, row-major with iy = 0 at im_min; +inf
  /// where λ is an eigenvalue.
  std::vector<double> log10_norm;
  std::vector<bool> infinite;
  std::vector<bool> converged;
  double h = 0.0;
  std::string potential_source;

  double at(std::size_t ix, std::size_t iy) const { return log10_norm[ix + grid.nx * iy]; }
  /// Min and max over the finite entries (NaN when none are finite).
  std::pair<double, double> finite_range() const;
  /// Fraction of grid points with log10 norm at least `level`.
  double fraction_at_least(double level) const;
};

struct MapOptions {
  unsigned threads = 1;
  double tol = 1e-10;
  /// Evaluate grid points in reverse order; results must not change.
  bool reverse_order = false;
  std::uint64_t seed = kDefaultSeed;
};

/// Every grid point is independent: the result does not depend on thread
/// count or evaluation order.
ResolventMap pseudospectra_map(const CMatrix& A, const LambdaGrid& grid, const MapOptions& opts = {});

/// Header "re,im,log10norm"; infinite entries are written as "inf".
void write_map_csv(std::ostream& os, const ResolventMap& map);
/// Binary 8-bit PGM (P5), top row at im_max, values clamped to the finite range.
void write_map_pgm(std::ostream& os, const ResolventMap& map);

/// Formats a double with 17 significant digits ("inf" for +infinity).
std::string format_double(double v);

}  // namespace pseudolab
