#pragma once

/// @file quasimode.hpp
/// @brief Localised approximate eigenfunctions e^{iγx/h} φ((x - c)/h^p)
/// certifying resolvent growth on Φ(V).

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "pseudolab/discretize.hpp"
#include "pseudolab/potential.hpp"

namespace pseudolab {

/// φ(s) = exp(-1/(1 - s^2)) on |s| < 1, zero outside.
class BumpFunction {
public:
  static double value(double s);
  static double derivative(double s);
  static double second_derivative(double s);

  /// L^2(-1, 1) norms of φ, φ', φ'' (composite Simpson, 10^5 panels),
  /// computed once.
  static const BumpFunction& standard();

  double norm() const { return norm_; }
  double derivative_norm() const { return d1_norm_; }
  double second_derivative_norm() const { return d2_norm_; }

private:
  BumpFunction();
  double norm_, d1_norm_, d2_norm_;
};

struct Quasimode {
  double c = 0.0;
  double gamma = 0.0;
  double p = 0.5;
  double h = 0.0;
  /// V(c) + γ^2.
  Complex lambda;
  /// |target - lambda| when built from a target λ by projection.
  double mismatch = 0.0;
  Grid grid{0.0, 1.0, 1};
  /// Samples on grid nodes first_node .. first_node + values.size() - 1;
  /// zero elsewhere.
  std::size_t first_node = 0;
  CVector values;

  double support_radius() const;
  CVector full_vector() const;
};

Quasimode build_quasimode(const Potential& V, double c, double gamma, double p, double h, const Grid& grid);

/// Picks c among range samples minimising |Im(target - V(c))| with
/// Re(target - V(c)) >= -1e-12 and the support ball inside a piece, then
/// γ = sqrt(max(Re(target - V(c)), 0)).
Quasimode quasimode_for_lambda(const Potential& V, Complex target, double p, double h, const Grid& grid);

/// ||(A - λ) f|| / ||f|| with the dense matrix.
double residual_ratio(const OperatorMatrix& A, const Quasimode& q);
/// Same quantity from the three-point stencil of -h^2 d^2/dx^2 + V on
/// q.grid; no matrix is formed, so very fine grids are cheap.
double residual_ratio(const Potential& V, const Quasimode& q);

/// k1 h^{2-2p} + k2 h^{1-p} + sup |V - V(c)| over the support (101 samples)
/// + projection mismatch, with k1 = ||φ''||/||φ|| and k2 = 2|γ| ||φ'||/||φ||.
double residual_bound(const Potential& V, const Quasimode& q);

/// Lower bound on ||(H - w)^{-1}|| given ||(H - λ)^{-1}|| >= L and
/// |λ - w| <= delta, from the resolvent identity.
double closure_lower_bound(double L, double delta);

struct BlowupPoint {
  double h = 0.0;
  double ratio = 0.0;
  double bound = 0.0;
  /// 1 / ratio.
  double lower_bound = 0.0;
};

/// Residual sweep over `hs` with grids of spacing at most h^2.
std::vector<BlowupPoint> blowup_sweep(const Potential& V, Complex target, double p, std::span<const double> hs);

/// Header "h,ratio,bound,lower_bound_resolvent".
void write_blowup_csv(std::ostream& os, std::span<const BlowupPoint> rows);

}  // namespace pseudolab
