#include "pseudolab/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pseudolab/linalg.hpp"

namespace pseudolab {

namespace {

constexpr double kEigenvalueThreshold = 1e-10;

/// log of |(u, h u')| |(v, h v')| / h at node k.
double wronskian_scale_log(const OdeSolution& u, const OdeSolution& v, std::size_t k) {
  const double h = u.h;
  const double nu = std::hypot(std::abs(u.f[k]), h * std::abs(u.df[k]));
  const double nv = std::hypot(std::abs(v.f[k]), h * std::abs(v.df[k]));
  return std::log(nu) + std::log(nv) - std::log(h) + u.log_scale[k] + v.log_scale[k];
}

void check_not_eigenvalue(const OdeSolution& u, const OdeSolution& v, std::size_t k) {
  const ScaledValue w = wronskian_at(u, v, k);
  if (w.is_zero() || w.log_abs() - wronskian_scale_log(u, v, k) < std::log(kEigenvalueThreshold))
    throw DomainError("λ is (numerically) an eigenvalue");
}

std::size_t cut_node(const Mesh& mesh, double cut) {
  for (std::size_t k = 0; k + 1 < mesh.size(); ++k)
    if (mesh.x(k) == cut) return k;
  throw DomainError("cut is not a mesh node");
}

/// ∫|φ|^2 with the endpoint-corrected trapezoid rule, using φ'.
double hermite_trapezoid_sq(const std::vector<double>& x, const std::vector<Complex>& p,
                            const std::vector<Complex>& dp) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double s = x[k + 1] - x[k];
    if (s == 0.0) continue;
    const double g0 = std::norm(p[k]), g1 = std::norm(p[k + 1]);
    const double d0 = 2.0 * (std::conj(p[k]) * dp[k]).real();
    const double d1 = 2.0 * (std::conj(p[k + 1]) * dp[k + 1]).real();
    sum += 0.5 * s * (g0 + g1) + s * s / 12.0 * (d0 - d1);
  }
  return sum;
}

}  // namespace

double default_ode_step(double h) { return h / 20.0; }

GreenKernel::GreenKernel(OdeSolution u, OdeSolution v) : u_(std::move(u)), v_(std::move(v)) {
  if (u_.size() != v_.size() || u_.size() < 2) throw DomainError("Green kernel solutions live on different meshes");
  const std::size_t ref = u_.size() / 2;
  w_ = wronskian_at(u_, v_, ref);
  for (std::size_t k = 0; k < u_.size(); ++k) {
    const Complex r = ratio(wronskian_at(u_, v_, k), w_);
    spread_ = std::max(spread_, std::abs(r - 1.0));
  }
}

Complex GreenKernel::operator()(double x, double y) const {
  const double lo = std::min(x, y), hi = std::max(x, y);
  const ScaledValue num = u_.value_at(lo) * v_.value_at(hi);
  return -ratio(num, w_) / (h() * h());
}

CMatrix GreenKernel::sample(std::span<const double> xs) const {
  const auto n = static_cast<Eigen::Index>(xs.size());
  std::vector<ScaledValue> us(xs.size()), vs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    us[i] = u_.value_at(xs[i]);
    vs[i] = v_.value_at(xs[i]);
  }
  const double c = -1.0 / (h() * h());
  CMatrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto lo = static_cast<std::size_t>(xs[static_cast<std::size_t>(i)] <= xs[static_cast<std::size_t>(j)] ? i : j);
      const auto hi = static_cast<std::size_t>(lo == static_cast<std::size_t>(i) ? j : i);
      G(i, j) = c * ratio(us[lo] * vs[hi], w_);
    }
  return G;
}

GreenKernel green_kernel(const Potential& V, Complex lambda, double h, const Mesh& mesh) {
  OdeSolution u = integrate_solution(V, lambda, h, true, mesh);
  OdeSolution v = integrate_solution(V, lambda, h, false, mesh);
  check_not_eigenvalue(u, v, u.size() / 2);
  return GreenKernel(std::move(u), std::move(v));
}

GreenKernel green_kernel(const Potential& V, Complex lambda, double h) {
  return green_kernel(V, lambda, h, Mesh::build(V, default_ode_step(h)));
}

Complex RankOneKernel::phi(double x) const {
  if (x <= cut) return ratio(full.left_solution().value_at(x), u_cut);
  return ratio(full.right_solution().value_at(x), v_cut);
}

RankOneKernel rank_one_difference(const Potential& V, Complex lambda, double h, double cut, double max_step) {
  const double tol = 1e-12 * V.length();
  if (!(cut > V.a() + tol && cut < V.b() - tol)) throw DomainError("cut must lie strictly inside the interval");
  const double breaks[] = {cut};
  const Mesh mesh = Mesh::build(V, max_step, breaks);
  GreenKernel full = green_kernel(V, lambda, h, mesh);
  const OdeSolution& u = full.left_solution();
  const OdeSolution& v = full.right_solution();
  const std::size_t kc = cut_node(mesh, cut);

  RankOneKernel r;
  r.cut = cut;
  r.h = h;
  r.lambda = lambda;
  r.u_cut = u.value(kc);
  r.v_cut = v.value(kc);

  double umax = -std::numeric_limits<double>::infinity(), vmax = umax;
  for (std::size_t k = 0; k <= kc; ++k) umax = std::max(umax, u.value(k).log_abs());
  for (std::size_t k = kc; k < mesh.size(); ++k) vmax = std::max(vmax, v.value(k).log_abs());
  if (r.u_cut.is_zero() || r.v_cut.is_zero() || r.u_cut.log_abs() - umax < std::log(1e-10) ||
      r.v_cut.log_abs() - vmax < std::log(1e-10))
    throw DomainError("cut coincides with a zero of a boundary solution; normalisation impossible");

  r.wronskian = wronskian_at(u, v, kc) / (r.u_cut * r.v_cut);
  r.kappa = 1.0 / r.wronskian.value();

  std::vector<Complex> p(mesh.size()), dp(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const bool left = k <= kc;
    const OdeSolution& s = left ? u : v;
    const ScaledValue& at_cut = left ? r.u_cut : r.v_cut;
    p[k] = ratio(s.value(k), at_cut);
    dp[k] = ratio(s.derivative(k), at_cut);
  }
  r.phi_norm_sq = hermite_trapezoid_sq(mesh.nodes(), p, dp);
  r.norm = std::abs(r.kappa) * r.phi_norm_sq;
  r.resolvent_difference_norm = r.norm / (h * h);

  // w = û - v̂ vanishes at the cut, so on each side it is w'(cut) times the
  // solution started there with data (0, 1).
  const Complex dw = ratio(u.derivative(kc), r.u_cut) - ratio(v.derivative(kc), r.v_cut);
  {
    const Potential VL = V.restricted(V.a(), cut);
    const Mesh mL = Mesh::build(VL, max_step);
    const OdeSolution uL = integrate_solution(VL, lambda, h, true, mL);
    const OdeSolution wL = integrate_solution(VL, lambda, h, false, mL);
    const std::size_t k = mL.size() / 2;
    r.wronskian_left = wronskian_at(uL, wL, k) / uL.value(mL.size() - 1) * dw;
  }
  {
    const Potential VR = V.restricted(cut, V.b());
    const Mesh mR = Mesh::build(VR, max_step);
    const OdeSolution wR = integrate_solution(VR, lambda, h, true, mR);
    const OdeSolution vR = integrate_solution(VR, lambda, h, false, mR);
    const std::size_t k = mR.size() / 2;
    r.wronskian_right = wronskian_at(wR, vR, k) / vR.value(0) * dw;
  }
  r.full = std::move(full);
  return r;
}

RankOneKernel rank_one_difference(const Potential& V, Complex lambda, double h, double cut) {
  return rank_one_difference(V, lambda, h, cut, default_ode_step(h));
}

SplitGreenKernel::SplitGreenKernel(GreenKernel left, GreenKernel right, double cut)
    : left_(std::move(left)), right_(std::move(right)), cut_(cut) {}

Complex SplitGreenKernel::operator()(double x, double y) const {
  if (x < cut_ && y < cut_) return left_(x, y);
  if (x > cut_ && y > cut_) return right_(x, y);
  return {0.0, 0.0};
}

CMatrix SplitGreenKernel::sample(std::span<const double> xs) const {
  std::vector<double> lx, rx;
  std::vector<Eigen::Index> li, ri;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < cut_) {
      lx.push_back(xs[i]);
      li.push_back(static_cast<Eigen::Index>(i));
    } else if (xs[i] > cut_) {
      rx.push_back(xs[i]);
      ri.push_back(static_cast<Eigen::Index>(i));
    }
  }
  const auto n = static_cast<Eigen::Index>(xs.size());
  CMatrix G = CMatrix::Zero(n, n);
  const CMatrix GL = left_.sample(lx), GR = right_.sample(rx);
  for (std::size_t i = 0; i < li.size(); ++i)
    for (std::size_t j = 0; j < li.size(); ++j) G(li[i], li[j]) = GL(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  for (std::size_t i = 0; i < ri.size(); ++i)
    for (std::size_t j = 0; j < ri.size(); ++j) G(ri[i], ri[j]) = GR(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return G;
}

SplitGreenKernel split_green_kernel(const Potential& V, Complex lambda, double h, double cut, double max_step) {
  const Potential VL = V.restricted(V.a(), cut);
  const Potential VR = V.restricted(cut, V.b());
  return SplitGreenKernel(green_kernel(VL, lambda, h, Mesh::build(VL, max_step)),
                          green_kernel(VR, lambda, h, Mesh::build(VR, max_step)), cut);
}

ScaledValue shooting_miss(const Potential& V, Complex lambda, double h, const Mesh& mesh) {
  const OdeSolution u = integrate_solution(V, lambda, h, true, mesh);
  return u.value(u.size() - 1);
}

namespace {

struct MissSample {
  ScaledValue raw;
  Complex normalized;
};

MissSample evaluate_miss(const Potential& V, Complex lambda, double h, const Mesh& mesh) {
  const OdeSolution u = integrate_solution(V, lambda, h, true, mesh);
  MissSample m;
  m.raw = u.value(u.size() - 1);
  m.normalized = ratio(m.raw, u.max_abs());
  return m;
}

bool strict_sign_change(double a, double b) { return (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0); }

}  // namespace

std::vector<EigenRoot> shooting_eigenvalues(const Potential& V, double h, double lo, double hi, std::size_t count,
                                            const ShootingOptions& opts) {
  if (!(hi > lo)) throw DomainError("shooting window is empty");
  if (opts.scan_points < 3) throw DomainError("shooting scan needs at least 3 points");
  const Mesh mesh = Mesh::build(V, opts.max_step > 0.0 ? opts.max_step : default_ode_step(h));
  const std::size_t N = opts.scan_points;
  const double spacing = (hi - lo) / static_cast<double>(N - 1);

  std::vector<double> grid(N);
  std::vector<MissSample> scan(N);
  for (std::size_t i = 0; i < N; ++i) {
    grid[i] = lo + spacing * static_cast<double>(i);
    scan[i] = evaluate_miss(V, grid[i], h, mesh);
  }

  std::vector<double> seeds;
  for (std::size_t i = 1; i + 1 < N; ++i) {
    const double a = std::abs(scan[i].normalized);
    if (a <= std::abs(scan[i - 1].normalized) && a <= std::abs(scan[i + 1].normalized)) seeds.push_back(grid[i]);
  }
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const Complex m0 = scan[i].normalized, m1 = scan[i + 1].normalized;
    if (strict_sign_change(m0.real(), m1.real()))
      seeds.push_back(grid[i] + spacing * m0.real() / (m0.real() - m1.real()));
    if (strict_sign_change(m0.imag(), m1.imag()))
      seeds.push_back(grid[i] + spacing * m0.imag() / (m0.imag() - m1.imag()));
  }

  const double width = hi - lo;
  std::vector<EigenRoot> roots;
  for (double seed : seeds) {
    Complex l0 = seed, l1 = seed + 0.1 * spacing;
    MissSample s0 = evaluate_miss(V, l0, h, mesh);
    MissSample s1 = evaluate_miss(V, l1, h, mesh);
    bool ok = true;
    for (int it = 0; it < opts.max_iterations; ++it) {
      const ScaledValue denom = s1.raw - s0.raw;
      if (denom.is_zero()) break;
      const Complex step = (l1 - l0) * ratio(s1.raw, denom);
      const Complex l2 = l1 - step;
      if (!std::isfinite(l2.real()) || !std::isfinite(l2.imag()) || l2.real() < lo - 0.1 * width ||
          l2.real() > hi + 0.1 * width || std::abs(l2.imag()) > width) {
        ok = false;
        break;
      }
      l0 = l1;
      s0 = s1;
      l1 = l2;
      s1 = evaluate_miss(V, l1, h, mesh);
      if (std::abs(step) < 1e-13 * (1.0 + std::abs(l1))) break;
    }
    if (!ok || !(std::abs(s1.normalized) < opts.tolerance)) continue;
    if (l1.real() < lo || l1.real() > hi) continue;
    const bool dup = std::any_of(roots.begin(), roots.end(), [&](const EigenRoot& r) {
      return std::abs(r.lambda - l1) < 1e-7 * (1.0 + std::abs(l1));
    });
    if (!dup) roots.push_back({l1, std::abs(s1.normalized), h});
  }
  if (roots.empty()) throw DomainError("no eigenvalues found in the search window");
  std::sort(roots.begin(), roots.end(), [](const EigenRoot& a, const EigenRoot& b) {
    return a.lambda.real() < b.lambda.real() || (a.lambda.real() == b.lambda.real() && a.lambda.imag() < b.lambda.imag());
  });
  if (count > 0 && roots.size() > count) roots.resize(count);
  return roots;
}

void write_eigen_csv(std::ostream& os, std::span<const EigenRoot> roots) {
  os << "re,im,abs_miss,h\n";
  for (const auto& r : roots)
    os << format_double(r.lambda.real()) << ',' << format_double(r.lambda.imag()) << ','
       << format_double(r.abs_miss) << ',' << format_double(r.h) << '\n';
}

}  // namespace pseudolab
