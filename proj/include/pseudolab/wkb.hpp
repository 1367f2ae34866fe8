#pragma once

/// @file wkb.hpp
/// @brief WKB solutions q^{-1/4} exp(±ξ/h) of -h^2 f'' + (V - λ) f = 0 with
/// ξ(x) = ∫_a^x sqrt(V - λ), and the asymptotics of the rank-one constants.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "pseudolab/ode.hpp"
#include "pseudolab/potential.hpp"

namespace pseudolab {

/// q = V - λ at the mesh nodes.
std::vector<Complex> q_samples(const Potential& V, Complex lambda, const Mesh& mesh);

/// Principal square root of q at the mesh nodes.
///
/// If λ ∉ Φ(V) then V(x) - λ ∉ (-∞, 0] for every x (otherwise λ = V(x) + t
/// with t ≥ 0), so the principal branch is continuous on each piece with
/// positive real part. Rejects λ within the sampling radius of Φ(V) and any
/// node with q on (-∞, 0] or |q| < 1e-12.
std::vector<Complex> branch_sqrt(const Potential& V, Complex lambda, const Mesh& mesh);

/// Cumulative Simpson integral of sqrt(q) from a; odd nodes use the
/// three-point half-panel rule. Throws when Re ξ fails to increase.
std::vector<Complex> eikonal(std::span<const Complex> sqrt_q, const Mesh& mesh);

enum class WkbBranch { Growing, Decaying };

struct WkbSolution {
  Complex lambda;
  double h = 0.0;
  WkbBranch which = WkbBranch::Growing;
  Mesh mesh;
  std::vector<Complex> q, sqrt_q, xi;
  /// q^{-1/4}.
  std::vector<Complex> amplitude;

  /// y = q^{-1/4} e^{±ξ/h}.
  ScaledValue value(std::size_t k) const;
  /// y' = ±h^{-1} q^{1/4} e^{±ξ/h}.
  ScaledValue derivative(std::size_t k) const;
};

struct WkbPair {
  WkbSolution y1, y2;
};

/// Throws DomainError when Re(ξ(b) - ξ(a))/h exceeds 700, where y1/y2 no
/// longer fits a double; split the interval or raise h.
WkbPair wkb_pair(const Potential& V, Complex lambda, double h, const Mesh& mesh);
WkbPair wkb_pair(const Potential& V, Complex lambda, double h);

/// max over nodes of |y - y2| / |y| where y solves the ODE exactly (RK4,
/// step h/20) with y(b) = y2(b), y'(b) = y2'(b).
double wkb_relative_error(const Potential& V, Complex lambda, double h);

struct PieceDerivatives {
  std::function<Complex(double)> first, second;
};

struct ErrorControlOptions {
  /// Central-difference spacing as a fraction of b - a.
  double spacing_factor = 1e-5;
  /// Closed-form V' and V'' per piece; numerical differences when empty.
  std::vector<PieceDerivatives> closed_forms;
};

/// ∫ |q''/q^{3/2} - (5/4) q'^2/q^{5/2}| over every piece, by Simpson with
/// panel doubling until the relative change is below 1e-10 (at most 2^20
/// panels per piece).
double error_control_integral(const Potential& V, Complex lambda, const ErrorControlOptions& opts = {});

/// Decaying exponentials are dropped from 2 sinh(z) once Re z ≥ 5; the
/// relative error is |e^{-2z}| < 1e-4 there.
inline constexpr double kSinhCollapse = 5.0;
double sinh_collapse_error(Complex z);

struct AsymptoticConstants {
  /// -h q(cut)^{-1/2} / 2.
  Complex kappa;
  /// h / Re sqrt(q(cut)): steepest descent on both sides of the cut.
  double phi_norm_sq = 0.0;
  /// |kappa| phi_norm_sq.
  double product = 0.0;
  /// ∫ |q(cut)/q(x)|^{1/2} e^{-2|Re(ξ(x) - ξ(cut))|/h} dx, the WKB profile
  /// before the Laplace approximation.
  double phi_norm_sq_profile = 0.0;
};

/// Requires Re(ξ(cut) - ξ(a)) and Re(ξ(b) - ξ(cut)) to be at least kSinhCollapse·h.
AsymptoticConstants asymptotic_constants(const Potential& V, Complex lambda, double h, double cut);

struct WkbDiagnostic {
  double h = 0.0;
  double max_rel_err_y2 = 0.0;
  Complex kappa;
  double phi_norm_sq = 0.0;
  double product = 0.0;
};

std::vector<WkbDiagnostic> wkb_sweep(const Potential& V, Complex lambda, double cut, std::span<const double> hs);

/// Header "h,max_rel_err_y2,kappa,phi_norm_sq,product"; kappa is written as |kappa|.
void write_wkb_csv(std::ostream& os, std::span<const WkbDiagnostic> rows);

}  // namespace pseudolab
