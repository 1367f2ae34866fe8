#pragma once

/// @file ode.hpp
/// @brief Fixed-step RK4 for -h^2 f'' + (V - λ) f = 0 on piecewise-uniform
/// meshes, with values stored as mantissa * exp(log_scale).

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pseudolab/potential.hpp"
#include "pseudolab/types.hpp"

namespace pseudolab {

/// z = mantissa * exp(log_scale). Keeps e^{ξ/h}-sized numbers finite.
struct ScaledValue {
  Complex mantissa{0.0, 0.0};
  double log_scale = 0.0;

  Complex value() const { return mantissa * std::exp(log_scale); }
  /// log|z|; -inf for zero.
  double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
  bool is_zero() const { return mantissa == Complex(0.0, 0.0); }
};

ScaledValue operator*(const ScaledValue& x, const ScaledValue& y);
ScaledValue operator/(const ScaledValue& x, const ScaledValue& y);
ScaledValue operator*(const ScaledValue& x, Complex s);
/// Sum brought to the larger of the two scales.
ScaledValue operator+(const ScaledValue& x, const ScaledValue& y);
ScaledValue operator-(const ScaledValue& x, const ScaledValue& y);
/// x / y as an ordinary complex number.
Complex ratio(const ScaledValue& x, const ScaledValue& y);

struct MeshSegment {
  std::size_t piece = 0;
  double left = 0.0, right = 0.0;
  std::size_t panels = 0;
  /// Global index of the segment's left node.
  std::size_t first = 0;

  double step() const { return (right - left) / static_cast<double>(panels); }
};

/// Every piece of V, split further at the given breakpoints, carries its own
/// uniform panels. Segment ends are stored once per segment, so a breakpoint
/// appears twice (as a right end and as the next left end).
class Mesh {
public:
  /// Panel counts are the smallest even numbers with step <= max_step.
  static Mesh build(const Potential& V, double max_step, std::span<const double> breakpoints = {});

  std::size_t size() const { return x_.size(); }
  double x(std::size_t k) const { return x_[k]; }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<MeshSegment>& segments() const { return segments_; }
  std::size_t segment_of_node(std::size_t k) const { return seg_[k]; }
  double max_step() const;
  double a() const { return x_.front(); }
  double b() const { return x_.back(); }

  /// V at node k; piece ends use the one-sided offset.
  Complex potential(const Potential& V, std::size_t k) const;

  /// Segment and panel holding x (first match from the left).
  struct Location {
    std::size_t segment = 0;
    std::size_t node = 0;  // left node of the panel
    double t = 0.0;        // fractional position in the panel
  };
  Location locate(double x) const;

private:
  std::vector<double> x_;
  std::vector<std::size_t> seg_;
  std::vector<MeshSegment> segments_;
};

struct Rescaling {
  double x = 0.0;
  /// Positive factor removed from the state, as its logarithm.
  double log_factor = 0.0;
};

/// Samples of (f, f') along a mesh; both share log_scale[k].
struct OdeSolution {
  Mesh mesh;
  Complex lambda;
  double h = 0.0;
  bool from_left = true;
  std::vector<Complex> f, df;
  std::vector<double> log_scale;
  /// V - λ at the nodes.
  std::vector<Complex> q;
  std::vector<Rescaling> ledger;

  std::size_t size() const { return f.size(); }
  ScaledValue value(std::size_t k) const { return {f[k], log_scale[k]}; }
  ScaledValue derivative(std::size_t k) const { return {df[k], log_scale[k]}; }
  /// Cubic Hermite interpolation inside the panel holding x; the derivative
  /// interpolates (f', f'') with f'' = h^-2 q f.
  ScaledValue value_at(double x) const;
  ScaledValue derivative_at(double x) const;
  /// Largest |f| over the mesh nodes.
  ScaledValue max_abs() const;
};

struct InitialData {
  ScaledValue f{Complex(0.0, 0.0), 0.0};
  ScaledValue df{Complex(1.0, 0.0), 0.0};
};

/// RK4 for f' = g, g' = h^-2 (V - λ) f from the left or right end of the
/// mesh, default data (f, f') = (0, 1). The state is renormalised whenever
/// its magnitude leaves [1e-100, 1e100]; each event goes to the ledger.
/// Throws DomainError when a mesh step exceeds h/10 or the state is not finite.
OdeSolution integrate_solution(const Potential& V, Complex lambda, double h, bool from_left, const Mesh& mesh,
                               const InitialData& data = {});

/// u v' - u' v at node k.
ScaledValue wronskian_at(const OdeSolution& u, const OdeSolution& v, std::size_t k);

}  // namespace pseudolab
