#pragma once

/// @file twist.hpp
/// @brief Position-dependent rotation U_h between the two copies of
/// -h^2 d^2/dx^2 + V and -h^2 d^2/dx^2 + m, interpolating across a cut c.
///
/// Unknowns are ordered (f_0 .. f_{n-1}, g_0 .. g_{n-1}); at node j the
/// rotation is [[C_j, S_j], [-S_j, C_j]] with C = cos θ, S = sin θ.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pseudolab/discretize.hpp"
#include "pseudolab/potential.hpp"

namespace pseudolab {

/// π/2 for s ≤ -1/3, π(1 - 3s)/4 on [-1/3, 1/3], 0 for s ≥ 1/3.
double twist_angle(double s);
/// dθ/ds away from the kinks: -3π/4 inside, 0 outside.
double twist_angle_slope(double s);

struct TwistConfig {
  Potential V;
  double c = 0.0;
  double m = 0.0;
  double g_exp = 2.0 / 3.0;
  double h = 0.1;
  Grid grid{-1.0, 1.0, 1};

  /// Half-width h^{g_exp}/3 of the transition zone.
  double zone_radius() const;
  /// Nodes strictly inside (c - zone_radius, c + zone_radius).
  std::size_t nodes_in_zone() const;
  /// Throws DomainError on any violated invariant, including fewer than
  /// `min_zone_nodes` nodes in the transition zone or a node on c.
  void validate(std::size_t min_zone_nodes = 32) const;
};

inline constexpr std::size_t kMinZoneNodes = 32;

/// Smallest grid on (a, b) with at least `min_zone_nodes` nodes in the
/// transition zone and no node within 1e-9 dx of c.
Grid twist_grid(const Potential& V, double c, double g_exp, double h, std::size_t min_zone_nodes = kMinZoneNodes);

/// m = max Re V + |λ| + 1 over range samples, doubled (at most 8 times)
/// until λ lies outside conv Φ of both flattened potentials.
double flattening_constant(const Potential& V, double c, Complex lambda);

/// V1 = V on x > c and m on x < c; V2 the other way round.
Potential twist_v1(const TwistConfig& cfg);
Potential twist_v2(const TwistConfig& cfg);

struct TwistMatrices {
  CSparse H1, H2, U;
  /// Twisted H1: U H1 U^T.
  CSparse T;
  /// P_h D in symmetric form: entries ±P_{j±1/2} J / (2 dx) with the edge
  /// value P_{j+1/2} = 2h^2 (θ_{j+1} - θ_j)/dx, so the θ'' term at the kinks
  /// of θ is included.
  CSparse PD;
  /// Q_h on edges: Q_{j+1/2}/2 on the off-diagonals, Q_{j+1/2} = h^2 ((θ_{j+1} - θ_j)/dx)^2.
  CSparse Q;
  /// Pointwise (m - V) [[χ1 S^2 - χ2 C^2, C S], [C S, χ2 C^2 - χ1 S^2]].
  CSparse G;
  /// Central difference on both copies.
  CSparse D;
  std::vector<double> theta;
  /// max over nodes of |2 h^2 θ'| and h^2 θ'^2 (the bare multipliers).
  double norm_P = 0.0, norm_Q = 0.0;
  /// max over nodes of the 2x2 block norm of G, and Σ_j dx |G_j|.
  double norm_G = 0.0, norm_G_l1 = 0.0;
};

TwistMatrices assemble_twist(const TwistConfig& cfg);

struct ConjugationResidual {
  /// ||U H1 U^T - (H2 + P D + Q + G)||.
  double spectral = 0.0;
  /// The same residual composed with (H0 + I)^{-1}, H0 the free Laplacian on
  /// both copies.
  double graph = 0.0;
  /// ||U H1 U^T - H2||: the correction terms left out.
  double uncorrected = 0.0;
};

ConjugationResidual verify_conjugation(const TwistConfig& cfg);

struct ScalingFit {
  std::vector<double> h, norm_P, norm_Q, norm_G, norm_G_l1;
  double slope_P = 0.0, slope_Q = 0.0, slope_G = 0.0, slope_G_l1 = 0.0;
};

/// Rebuilds the template for every h on twist_grid; needs at least 3 values.
ScalingFit scaling_sweep(const TwistConfig& tmpl, std::span<const double> hs);

struct TwistRow {
  double h = 0.0;
  double norm_P = 0.0, norm_Q = 0.0, norm_G = 0.0;
  /// ||(U H1 U^T - λ)^{-1} - (H2 - λ)^{-1}||.
  double res_diff = 0.0;
  /// ||(H2 - λ)^{-1}|| (||P D R|| + (||Q|| + ||G|| + ||residual||) ||R||), R = (U H1 U^T - λ)^{-1}.
  double bound_rhs = 0.0;
  /// ||D R||, the measured stand-in for the constant β.
  double beta = 0.0;
  double resolvent_h1 = 0.0;
  double resolvent_h2 = 0.0;
  double m = 0.0;
};

struct TwistSweep {
  std::vector<TwistRow> rows;
  std::vector<std::string> warnings;
  double slope = 0.0;
};

/// Points where λ hits the spectrum of either operator are dropped with a warning.
TwistSweep resolvent_difference_sweep(const TwistConfig& tmpl, Complex lambda, std::span<const double> hs);

/// Header "h,norm_P,norm_Q,norm_G,res_diff,bound_rhs".
void write_twist_csv(std::ostream& os, std::span<const TwistRow> rows);

}  // namespace pseudolab
