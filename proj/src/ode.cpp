#include "pseudolab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pseudolab {

namespace {

constexpr double kRenormHigh = 1e100;
constexpr double kRenormLow = 1e-100;

ScaledValue normalized(Complex m, double log_scale) {
  const double a = std::abs(m);
  if (a == 0.0 || !std::isfinite(a)) return {m, a == 0.0 ? 0.0 : log_scale};
  if (a >= kRenormLow && a <= kRenormHigh) return {m, log_scale};
  return {m / a, log_scale + std::log(a)};
}

}  // namespace

ScaledValue operator*(const ScaledValue& x, const ScaledValue& y) {
  return normalized(x.mantissa * y.mantissa, x.log_scale + y.log_scale);
}

ScaledValue operator/(const ScaledValue& x, const ScaledValue& y) {
  return normalized(x.mantissa / y.mantissa, x.log_scale - y.log_scale);
}

ScaledValue operator*(const ScaledValue& x, Complex s) { return normalized(x.mantissa * s, x.log_scale); }

ScaledValue operator+(const ScaledValue& x, const ScaledValue& y) {
  if (x.is_zero()) return y;
  if (y.is_zero()) return x;
  const double L = std::max(x.log_scale, y.log_scale);
  return normalized(x.mantissa * std::exp(x.log_scale - L) + y.mantissa * std::exp(y.log_scale - L), L);
}

ScaledValue operator-(const ScaledValue& x, const ScaledValue& y) { return x + y * Complex(-1.0, 0.0); }

Complex ratio(const ScaledValue& x, const ScaledValue& y) {
  return x.mantissa / y.mantissa * std::exp(x.log_scale - y.log_scale);
}

Mesh Mesh::build(const Potential& V, double max_step, std::span<const double> breakpoints) {
  if (!(max_step > 0.0)) throw DomainError("mesh step must be positive");
  const double tol = 1e-12 * V.length();
  Mesh mesh;
  for (std::size_t j = 0; j < V.piece_count(); ++j) {
    const auto& piece = V.piece(j);
    std::vector<double> ends{piece.left};
    std::vector<double> inner;
    for (double x : breakpoints)
      if (x > piece.left + tol && x < piece.right - tol) inner.push_back(x);
    std::sort(inner.begin(), inner.end());
    for (double x : inner)
      if (x > ends.back() + tol) ends.push_back(x);
    ends.push_back(piece.right);

    for (std::size_t s = 0; s + 1 < ends.size(); ++s) {
      MeshSegment seg;
      seg.piece = j;
      seg.left = ends[s];
      seg.right = ends[s + 1];
      auto panels = static_cast<std::size_t>(std::ceil((seg.right - seg.left) / max_step - 1e-9));
      panels = std::max<std::size_t>(panels, 2);
      panels += panels % 2;
      seg.panels = panels;
      seg.first = mesh.x_.size();
      for (std::size_t k = 0; k <= panels; ++k) {
        mesh.x_.push_back(k == panels ? seg.right : seg.left + seg.step() * static_cast<double>(k));
        mesh.seg_.push_back(mesh.segments_.size());
      }
      mesh.segments_.push_back(seg);
    }
  }
  return mesh;
}

double Mesh::max_step() const {
  double s = 0.0;
  for (const auto& seg : segments_) s = std::max(s, seg.step());
  return s;
}

Complex Mesh::potential(const Potential& V, std::size_t k) const {
  const auto& seg = segments_[seg_[k]];
  const auto& piece = V.piece(seg.piece);
  const double off = V.limit_offset();
  double x = x_[k];
  if (x <= piece.left + 0.5 * off) x = piece.left + off;
  if (x >= piece.right - 0.5 * off) x = piece.right - off;
  return V.in_piece(seg.piece, x);
}

Mesh::Location Mesh::locate(double x) const {
  const double tol = 1e-12 * (b() - a());
  if (x < a() - tol || x > b() + tol) throw DomainError("point lies outside the mesh");
  auto it = std::lower_bound(segments_.begin(), segments_.end(), x,
                             [](const MeshSegment& s, double v) { return s.right < v; });
  if (it == segments_.end()) --it;
  Location loc;
  loc.segment = static_cast<std::size_t>(it - segments_.begin());
  const double t = std::clamp((x - it->left) / it->step(), 0.0, static_cast<double>(it->panels));
  const auto panel = std::min(static_cast<std::size_t>(t), it->panels - 1);
  loc.node = it->first + panel;
  loc.t = t - static_cast<double>(panel);
  return loc;
}

namespace {

struct Endpoints {
  Complex p0, d0, p1, d1;
  double log_scale;
  double step;
  double t;
};

Endpoints panel_data(const OdeSolution& s, double x, bool derivative) {
  const auto loc = s.mesh.locate(x);
  const std::size_t k0 = loc.node, k1 = loc.node + 1;
  const double L = std::max(s.log_scale[k0], s.log_scale[k1]);
  const double w0 = std::exp(s.log_scale[k0] - L), w1 = std::exp(s.log_scale[k1] - L);
  const double c = 1.0 / (s.h * s.h);
  Endpoints e;
  if (derivative) {
    e.p0 = s.df[k0] * w0;
    e.d0 = c * s.q[k0] * s.f[k0] * w0;
    e.p1 = s.df[k1] * w1;
    e.d1 = c * s.q[k1] * s.f[k1] * w1;
  } else {
    e.p0 = s.f[k0] * w0;
    e.d0 = s.df[k0] * w0;
    e.p1 = s.f[k1] * w1;
    e.d1 = s.df[k1] * w1;
  }
  e.log_scale = L;
  e.step = s.mesh.x(k1) - s.mesh.x(k0);
  e.t = loc.t;
  return e;
}

ScaledValue hermite(const Endpoints& e) {
  const double t = e.t, t2 = t * t, t3 = t2 * t;
  const Complex v = (2 * t3 - 3 * t2 + 1) * e.p0 + (t3 - 2 * t2 + t) * e.step * e.d0 + (-2 * t3 + 3 * t2) * e.p1 +
                    (t3 - t2) * e.step * e.d1;
  return normalized(v, e.log_scale);
}

}  // namespace

ScaledValue OdeSolution::value_at(double x) const { return hermite(panel_data(*this, x, false)); }

ScaledValue OdeSolution::derivative_at(double x) const { return hermite(panel_data(*this, x, true)); }

ScaledValue OdeSolution::max_abs() const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) best = std::max(best, value(k).log_abs());
  return {Complex(1.0, 0.0), best};
}

OdeSolution integrate_solution(const Potential& V, Complex lambda, double h, bool from_left, const Mesh& mesh,
                               const InitialData& data) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  if (mesh.max_step() > h / 10.0 * (1.0 + 1e-12))
    throw DomainError("mesh step exceeds h/10; refine the mesh");
  if (data.f.is_zero() && data.df.is_zero()) throw DomainError("initial data must not vanish");

  const std::size_t n = mesh.size();
  OdeSolution s;
  s.mesh = mesh;
  s.lambda = lambda;
  s.h = h;
  s.from_left = from_left;
  s.f.resize(n);
  s.df.resize(n);
  s.log_scale.resize(n);
  s.q.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.q[k] = mesh.potential(V, k) - lambda;

  double L = -std::numeric_limits<double>::infinity();
  if (!data.f.is_zero()) L = std::max(L, data.f.log_scale);
  if (!data.df.is_zero()) L = std::max(L, data.df.log_scale);
  Complex f = data.f.mantissa * std::exp(data.f.log_scale - L);
  Complex g = data.df.mantissa * std::exp(data.df.log_scale - L);

  const double c = 1.0 / (h * h);
  auto store = [&](std::size_t k) {
    s.f[k] = f;
    s.df[k] = g;
    s.log_scale[k] = L;
  };
  std::size_t k = from_left ? 0 : n - 1;
  store(k);
  for (std::size_t done = 1; done < n; ++done) {
    const std::size_t next = from_left ? k + 1 : k - 1;
    const double x0 = mesh.x(k), x1 = mesh.x(next);
    if (x1 != x0) {
      const double st = x1 - x0;
      const std::size_t piece = mesh.segments()[mesh.segment_of_node(from_left ? k : next)].piece;
      const Complex q0 = s.q[k], q1 = s.q[next];
      const Complex qm = V.in_piece(piece, 0.5 * (x0 + x1)) - lambda;
      const Complex k1f = g, k1g = c * q0 * f;
      const Complex k2f = g + 0.5 * st * k1g, k2g = c * qm * (f + 0.5 * st * k1f);
      const Complex k3f = g + 0.5 * st * k2g, k3g = c * qm * (f + 0.5 * st * k2f);
      const Complex k4f = g + st * k3g, k4g = c * q1 * (f + st * k3f);
      f += st / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
      g += st / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
      if (!std::isfinite(std::abs(f)) || !std::isfinite(std::abs(g)))
        throw DomainError("ODE state is not finite");
      const double mag = std::max(std::abs(f), std::abs(g));
      if (mag > kRenormHigh || (mag < kRenormLow && mag > 0.0)) {
        f /= mag;
        g /= mag;
        L += std::log(mag);
        s.ledger.push_back({x1, std::log(mag)});
      }
    }
    k = next;
    store(k);
  }
  return s;
}

ScaledValue wronskian_at(const OdeSolution& u, const OdeSolution& v, std::size_t k) {
  return normalized(u.f[k] * v.df[k] - u.df[k] * v.f[k], u.log_scale[k] + v.log_scale[k]);
}

}  // namespace pseudolab
