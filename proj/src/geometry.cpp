#include "pseudolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pseudolab {

namespace {

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

}  // namespace

double segment_distance(Complex p, Complex a, Complex b) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

double ray_distance(Complex p, Complex origin) {
  const Complex d = p - origin;
  return d.real() <= 0.0 ? std::abs(d) : std::abs(d.imag());
}

ConvexPolygon ConvexPolygon::hull_of(std::span<const Complex> points, double dedup_tol) {
  std::vector<Complex> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  std::vector<Complex> uniq;
  uniq.reserve(pts.size());
  for (const Complex& p : pts) {
    // Sorted by real part, so only a short window can hold near-duplicates.
    bool dup = false;
    for (auto it = uniq.rbegin(); it != uniq.rend() && p.real() - it->real() <= dedup_tol; ++it) {
      if (std::abs(p - *it) <= dedup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) uniq.push_back(p);
  }

  ConvexPolygon poly;
  if (uniq.size() <= 2) {
    poly.vertices_ = uniq;
    return poly;
  }
  std::vector<Complex> h(2 * uniq.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], uniq[i]) <= 0.0) --k;
    h[k++] = uniq[i];
  }
  for (std::size_t i = uniq.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], uniq[i]) <= 0.0) --k;
    h[k++] = uniq[i];
  }
  h.resize(k - 1);
  poly.vertices_ = std::move(h);
  return poly;
}

bool ConvexPolygon::leftmost_at(double y, double& x_left) const {
  const auto& v = vertices_;
  if (v.empty()) return false;
  bool hit = false;
  x_left = std::numeric_limits<double>::infinity();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = v[i];
    const Complex b = v[(i + 1) % n];
    const double lo = std::min(a.imag(), b.imag());
    const double hi = std::max(a.imag(), b.imag());
    if (y < lo || y > hi) continue;
    double x;
    if (a.imag() == b.imag()) {
      x = std::min(a.real(), b.real());
    } else {
      const double t = (y - a.imag()) / (b.imag() - a.imag());
      x = a.real() + t * (b.real() - a.real());
    }
    x_left = std::min(x_left, x);
    hit = true;
  }
  return hit;
}

bool ConvexPolygon::contains(Complex p, double tol) const {
  if (vertices_.empty()) return false;
  return distance(p) <= tol;
}

double ConvexPolygon::distance(Complex p) const {
  const auto& v = vertices_;
  if (v.empty()) return std::numeric_limits<double>::infinity();
  if (v.size() == 1) return std::abs(p - v[0]);
  if (v.size() == 2) return segment_distance(p, v[0], v[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = v[i];
    const Complex b = v[(i + 1) % n];
    if (cross(a, b, p) < 0.0) inside = false;
    best = std::min(best, segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

}  // namespace pseudolab
