#pragma once

/// @file green.hpp
/// @brief Green functions of -h^2 d^2/dx^2 + V - λ from exact ODE solutions,
/// the rank-one resolvent difference under an interior Dirichlet condition,
/// and a shooting eigenvalue finder.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "pseudolab/ode.hpp"
#include "pseudolab/potential.hpp"

namespace pseudolab {

/// Default ODE step for kernels: h/20.
double default_ode_step(double h);

/// G(x, y) = -u(min) v(max) / (h^2 W) with u(a) = 0, v(b) = 0, W = u v' - u' v.
class GreenKernel {
public:
  GreenKernel() = default;
  GreenKernel(OdeSolution u, OdeSolution v);

  const OdeSolution& left_solution() const { return u_; }
  const OdeSolution& right_solution() const { return v_; }
  double h() const { return u_.h; }
  Complex lambda() const { return u_.lambda; }
  ScaledValue wronskian() const { return w_; }
  /// max_k |W(x_k) - W| / |W| over the mesh.
  double wronskian_spread() const { return spread_; }

  Complex operator()(double x, double y) const;
  /// Kernel matrix G(x_i, x_j).
  CMatrix sample(std::span<const double> xs) const;

private:
  OdeSolution u_, v_;
  ScaledValue w_;
  double spread_ = 0.0;
};

/// Throws DomainError("λ is (numerically) an eigenvalue") when |W| falls below
/// 1e-10 (|u v'| + |u' v|).
GreenKernel green_kernel(const Potential& V, Complex lambda, double h, const Mesh& mesh);
GreenKernel green_kernel(const Potential& V, Complex lambda, double h);

struct RankOneKernel {
  double cut = 0.0;
  double h = 0.0;
  Complex lambda;
  /// 1 / W(û, v̂) with û = u/u(cut), v̂ = v/v(cut).
  Complex kappa;
  /// ||φ||^2 with φ = û left of the cut and v̂ right of it.
  double phi_norm_sq = 0.0;
  /// |kappa| ||φ||^2.
  double norm = 0.0;
  /// The kernel of (K~ - λ)^{-1} - (K - λ)^{-1} is kappa φ(x) φ(y) / h^2;
  /// this is its operator norm, norm / h^2.
  double resolvent_difference_norm = 0.0;
  /// W(û, v̂), and the sub-interval Wronskians W(û, w) on the left and
  /// W(w, v̂) on the right for w = û - v̂, with w built from solutions
  /// integrated independently on each side of the cut.
  ScaledValue wronskian, wronskian_left, wronskian_right;
  GreenKernel full;
  ScaledValue u_cut, v_cut;

  Complex phi(double x) const;
  Complex kernel(double x, double y) const { return kappa * phi(x) * phi(y); }
};

RankOneKernel rank_one_difference(const Potential& V, Complex lambda, double h, double cut, double max_step);
RankOneKernel rank_one_difference(const Potential& V, Complex lambda, double h, double cut);

/// Green kernel of the operator with an extra Dirichlet condition at `cut`:
/// independent kernels on (a, cut) and (cut, b), zero across the cut.
class SplitGreenKernel {
public:
  SplitGreenKernel(GreenKernel left, GreenKernel right, double cut);
  const GreenKernel& left() const { return left_; }
  const GreenKernel& right() const { return right_; }
  Complex operator()(double x, double y) const;
  CMatrix sample(std::span<const double> xs) const;

private:
  GreenKernel left_, right_;
  double cut_;
};

SplitGreenKernel split_green_kernel(const Potential& V, Complex lambda, double h, double cut, double max_step);

struct ShootingOptions {
  std::size_t scan_points = 400;
  /// ODE step; 0 means h/20.
  double max_step = 0.0;
  /// Root acceptance: |u(b)| / max|u| below this.
  double tolerance = 1e-9;
  int max_iterations = 80;
};

struct EigenRoot {
  Complex lambda;
  /// |u(b; λ)| / max_x |u(x; λ)|.
  double abs_miss = 0.0;
  double h = 0.0;
};

/// u(b; λ) for the solution with u(a) = 0, u'(a) = 1.
ScaledValue shooting_miss(const Potential& V, Complex lambda, double h, const Mesh& mesh);

/// Scans the real window [lo, hi], seeds a complex secant iteration from
/// local minima of the normalised miss and from sign changes of its real and
/// imaginary parts, and returns deduplicated roots sorted by real part (at
/// most `count` when count > 0). Throws DomainError when none are found.
std::vector<EigenRoot> shooting_eigenvalues(const Potential& V, double h, double lo, double hi, std::size_t count = 0,
                                            const ShootingOptions& opts = {});

/// Header "re,im,abs_miss,h".
void write_eigen_csv(std::ostream& os, std::span<const EigenRoot> roots);

}  // namespace pseudolab
