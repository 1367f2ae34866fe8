#pragma once

/// @file potential.hpp
/// @brief Piecewise complex potentials and the geometry of their range.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pseudolab/geometry.hpp"
#include "pseudolab/types.hpp"

namespace pseudolab {

class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PotentialPiece {
  double left = 0.0;
  double right = 0.0;
  std::function<Complex(double)> rule;
  std::string source;
};

/// A complex potential on (a, b), smooth on each piece of a finite partition
/// a = x_0 < x_1 < ... < x_n = b. Values at interior partition points are
/// undefined; pieces are evaluated on their closures.
class Potential {
public:
  /// Validates the tiling and probes every piece for finite values. When
  /// `k_lower` is omitted it is the minimum of Re V over the range samples.
  Potential(std::vector<PotentialPiece> pieces, std::optional<double> k_lower = std::nullopt);

  double a() const { return pieces_.front().left; }
  double b() const { return pieces_.back().right; }
  double length() const { return b() - a(); }
  const std::vector<double>& partition() const { return partition_; }
  std::size_t piece_count() const { return pieces_.size(); }
  const PotentialPiece& piece(std::size_t j) const { return pieces_[j]; }
  double k_lower() const { return k_lower_; }

  /// Offset used for one-sided limits at partition points.
  double limit_offset() const { return 1e-9 * length(); }

  /// Index of the piece whose open interior holds x, or the end piece for
  /// x == a / x == b. Empty at interior partition points and outside [a, b].
  std::optional<std::size_t> piece_of(double x, double tol = 0.0) const;

  /// Throws DomainError at interior partition points or outside [a, b].
  Complex operator()(double x) const;
  /// Evaluates piece j's rule without a location check.
  Complex in_piece(std::size_t j, double x) const { return pieces_[j].rule(x); }
  /// One-sided limit at the left or right end of piece j.
  Complex limit_at(std::size_t j, bool right_end) const;

  bool near_partition_point(double x, double tol) const;

  /// Restriction to [lo, hi] ⊂ [a, b]; partition points inside are kept.
  Potential restricted(double lo, double hi) const;
  /// Adds the partition points in `cuts` (pieces keep their rules).
  Potential with_cuts(std::span<const double> cuts) const;
  /// V + s.
  Potential shifted(Complex s) const;
  /// V on the side of `cut` selected by `keep_right`, the constant m elsewhere.
  Potential flattened(double cut, double m, bool keep_right) const;

  std::string describe() const;

private:
  std::vector<PotentialPiece> pieces_;
  std::vector<double> partition_;
  double k_lower_ = 0.0;
};

/// Parses one expression per piece. With a single source and a nonempty
/// partition the same expression is used on every piece.
Potential parse_potential(std::span<const std::string> sources, double a, double b,
                          std::span<const double> partition);
Potential parse_potential(std::string_view src, double a, double b,
                          std::span<const double> partition = {});

/// "zero", "linear-i", "example-t5[:delta=D]". Interval defaults: zero on
/// (0, pi), the others on (-1, 1); pass a/b to override.
Potential catalog_potential(std::string_view name, std::optional<double> a = std::nullopt,
                            std::optional<double> b = std::nullopt);

/// Values at Chebyshev-Lobatto points of every piece (pieces in order,
/// samples_per_piece each); ends use one-sided limits.
std::vector<Complex> sample_range(const Potential& V, std::size_t samples_per_piece);

/// Sampled Φ(V) = closure(Ran V) + [0, ∞) and its convex hull.
class PhiRegion {
public:
  /// `radius` bounds how far the true range may stray from the samples.
  PhiRegion(std::vector<Complex> samples, double radius = 0.0);

  const std::vector<Complex>& samples() const { return samples_; }
  const ConvexPolygon& hull() const { return hull_; }
  double radius() const { return radius_; }
  /// Direction of the recession cone: the positive real axis.
  static constexpr Complex recession() { return {1.0, 0.0}; }

private:
  std::vector<Complex> samples_;
  ConvexPolygon hull_;
  double radius_;
};

inline constexpr std::size_t kDefaultRangeSamples = 2048;

PhiRegion build_phi_region(const Potential& V, std::size_t samples_per_piece = kDefaultRangeSamples);

double dist_to_phi(Complex lambda, const PhiRegion& region);
double dist_to_conv_phi(Complex lambda, const PhiRegion& region);

/// min over pieces j of dist(λ, conv Φ(V restricted to piece j)).
double min_piece_conv_distance(Complex lambda, const Potential& V,
                               std::size_t samples_per_piece = kDefaultRangeSamples);

/// Partition of (a, b) into `count` equal pieces merged with V's own partition.
std::vector<double> uniform_cuts(const Potential& V, std::size_t count);

}  // namespace pseudolab
