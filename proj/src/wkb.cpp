#include "pseudolab/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pseudolab/green.hpp"
#include "pseudolab/linalg.hpp"

namespace pseudolab {

namespace {

constexpr double kMaxExponent = 700.0;
constexpr std::size_t kInitialPanels = 64;
constexpr std::size_t kMaxPanels = std::size_t{1} << 20;

std::size_t node_at(const Mesh& mesh, double x) {
  for (std::size_t k = 0; k < mesh.size(); ++k)
    if (mesh.x(k) == x) return k;
  throw DomainError("point is not a mesh node");
}

}  // namespace

std::vector<Complex> q_samples(const Potential& V, Complex lambda, const Mesh& mesh) {
  std::vector<Complex> q(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k) q[k] = mesh.potential(V, k) - lambda;
  return q;
}

std::vector<Complex> branch_sqrt(const Potential& V, Complex lambda, const Mesh& mesh) {
  const PhiRegion region = build_phi_region(V);
  if (!(dist_to_phi(lambda, region) > region.radius()))
    throw DomainError("λ lies in Φ(V) or within its sampling radius; the WKB branch is undefined");
  const auto q = q_samples(V, lambda, mesh);
  std::vector<Complex> s(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double a = std::abs(q[k]);
    if (a < 1e-12 || (q[k].real() <= 0.0 && std::abs(q[k].imag()) <= 1e-14 * a))
      throw DomainError("V - λ touches (-∞, 0]; λ is too close to Φ(V)");
    s[k] = std::sqrt(q[k]);
  }
  return s;
}

std::vector<Complex> eikonal(std::span<const Complex> sqrt_q, const Mesh& mesh) {
  if (sqrt_q.size() != mesh.size()) throw DomainError("eikonal samples do not match the mesh");
  std::vector<Complex> xi(mesh.size());
  Complex carry{0.0, 0.0};
  for (const auto& seg : mesh.segments()) {
    const double s = seg.step();
    const std::size_t f0 = seg.first;
    xi[f0] = carry;
    for (std::size_t k = 1; k <= seg.panels; ++k) {
      const std::size_t i = f0 + k;
      if (k % 2 == 0)
        xi[i] = xi[i - 2] + s / 3.0 * (sqrt_q[i - 2] + 4.0 * sqrt_q[i - 1] + sqrt_q[i]);
      else
        xi[i] = xi[i - 1] + s / 12.0 * (5.0 * sqrt_q[i - 1] + 8.0 * sqrt_q[i] - sqrt_q[i + 1]);
      if (!(xi[i].real() > xi[i - 1].real())) throw DomainError("Re ξ is not increasing; square-root branch error");
    }
    carry = xi[f0 + seg.panels];
  }
  return xi;
}

ScaledValue WkbSolution::value(std::size_t k) const {
  const double sign = which == WkbBranch::Growing ? 1.0 : -1.0;
  return {amplitude[k] * std::polar(1.0, sign * xi[k].imag() / h), sign * xi[k].real() / h};
}

ScaledValue WkbSolution::derivative(std::size_t k) const {
  const double sign = which == WkbBranch::Growing ? 1.0 : -1.0;
  return {sign / (h * amplitude[k]) * std::polar(1.0, sign * xi[k].imag() / h), sign * xi[k].real() / h};
}

WkbPair wkb_pair(const Potential& V, Complex lambda, double h, const Mesh& mesh) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  WkbSolution y;
  y.lambda = lambda;
  y.h = h;
  y.mesh = mesh;
  y.q = q_samples(V, lambda, mesh);
  y.sqrt_q = branch_sqrt(V, lambda, mesh);
  y.xi = eikonal(y.sqrt_q, mesh);
  if ((y.xi.back().real() - y.xi.front().real()) / h > kMaxExponent)
    throw DomainError("Re(ξ(b) - ξ(a))/h exceeds 700; split the interval into shorter pieces or raise h");
  y.amplitude.resize(y.q.size());
  for (std::size_t k = 0; k < y.q.size(); ++k) y.amplitude[k] = 1.0 / std::sqrt(y.sqrt_q[k]);
  WkbPair p{y, y};
  p.y2.which = WkbBranch::Decaying;
  return p;
}

WkbPair wkb_pair(const Potential& V, Complex lambda, double h) {
  return wkb_pair(V, lambda, h, Mesh::build(V, default_ode_step(h)));
}

double wkb_relative_error(const Potential& V, Complex lambda, double h) {
  const Mesh mesh = Mesh::build(V, default_ode_step(h));
  const WkbPair p = wkb_pair(V, lambda, h, mesh);
  const std::size_t last = mesh.size() - 1;
  InitialData data;
  data.f = p.y2.value(last);
  data.df = p.y2.derivative(last);
  const OdeSolution exact = integrate_solution(V, lambda, h, false, mesh, data);
  double err = 0.0;
  for (std::size_t k = 0; k < mesh.size(); ++k)
    err = std::max(err, std::abs(ratio(p.y2.value(k), exact.value(k)) - 1.0));
  return err;
}

double error_control_integral(const Potential& V, Complex lambda, const ErrorControlOptions& opts) {
  if (!opts.closed_forms.empty() && opts.closed_forms.size() != V.piece_count())
    throw DomainError("closed-form derivatives must be given for every piece");
  const double delta = opts.spacing_factor * V.length();
  double total = 0.0;
  for (std::size_t j = 0; j < V.piece_count(); ++j) {
    const auto& piece = V.piece(j);
    const double stencil_margin = delta + V.limit_offset();
    auto integrand = [&](double x) {
      const Complex v0 = V.in_piece(j, x);
      Complex q1, q2;
      if (opts.closed_forms.empty()) {
        const double c = std::clamp(x, piece.left + stencil_margin, piece.right - stencil_margin);
        const Complex vc = c == x ? v0 : V.in_piece(j, c);
        const Complex vp = V.in_piece(j, c + delta), vm = V.in_piece(j, c - delta);
        q1 = (vp - vm) / (2.0 * delta);
        q2 = (vp - 2.0 * vc + vm) / (delta * delta);
      } else {
        q1 = opts.closed_forms[j].first(x);
        q2 = opts.closed_forms[j].second(x);
      }
      const Complex q = v0 - lambda;
      const Complex r = std::sqrt(q);
      const double val = std::abs(q2 / (q * r) - 1.25 * q1 * q1 / (q * q * r));
      if (!std::isfinite(val)) throw DomainError("error-control integrand is not finite");
      return val;
    };
    const double lo = piece.left + V.limit_offset(), hi = piece.right - V.limit_offset();
    std::size_t panels = kInitialPanels;
    double step = (hi - lo) / static_cast<double>(panels);
    const double ends = integrand(lo) + integrand(hi);
    double odd = 0.0, even = 0.0;
    for (std::size_t k = 1; k < panels; ++k) (k % 2 ? odd : even) += integrand(lo + step * static_cast<double>(k));
    double prev = step / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    while (panels < kMaxPanels) {
      panels *= 2;
      step *= 0.5;
      even += odd;
      odd = 0.0;
      for (std::size_t k = 1; k < panels; k += 2) odd += integrand(lo + step * static_cast<double>(k));
      const double next = step / 3.0 * (ends + 4.0 * odd + 2.0 * even);
      const bool done = std::abs(next - prev) <= 1e-10 * std::abs(next);
      prev = next;
      if (done) break;
    }
    total += prev;
  }
  return total;
}

double sinh_collapse_error(Complex z) {
  const Complex e = std::exp(z);
  return std::abs(2.0 * std::sinh(z) - e) / std::abs(e);
}

AsymptoticConstants asymptotic_constants(const Potential& V, Complex lambda, double h, double cut) {
  const double tol = 1e-12 * V.length();
  if (!(cut > V.a() + tol && cut < V.b() - tol)) throw DomainError("cut must lie strictly inside the interval");
  const double breaks[] = {cut};
  const Mesh mesh = Mesh::build(V, default_ode_step(h), breaks);
  const auto sq = branch_sqrt(V, lambda, mesh);
  const auto xi = eikonal(sq, mesh);
  const std::size_t kc = node_at(mesh, cut);
  if ((xi[kc].real() - xi.front().real()) / h < kSinhCollapse || (xi.back().real() - xi[kc].real()) / h < kSinhCollapse)
    throw DomainError("h too large: the cut is within 5h of an end in Re ξ");

  const Complex sc = sq[kc];
  AsymptoticConstants out;
  out.kappa = -h / (2.0 * sc);
  out.phi_norm_sq = h / sc.real();
  out.product = std::abs(out.kappa) * out.phi_norm_sq;

  double sum = 0.0;
  auto weight = [&](std::size_t k) {
    return std::sqrt(std::abs(sc * sc) / std::abs(sq[k] * sq[k])) *
           std::exp(-2.0 * std::abs(xi[k].real() - xi[kc].real()) / h);
  };
  for (std::size_t k = 0; k + 1 < mesh.size(); ++k)
    sum += 0.5 * (mesh.x(k + 1) - mesh.x(k)) * (weight(k) + weight(k + 1));
  out.phi_norm_sq_profile = sum;
  return out;
}

std::vector<WkbDiagnostic> wkb_sweep(const Potential& V, Complex lambda, double cut, std::span<const double> hs) {
  std::vector<WkbDiagnostic> rows;
  for (double h : hs) {
    WkbDiagnostic d;
    d.h = h;
    d.max_rel_err_y2 = wkb_relative_error(V, lambda, h);
    const auto c = asymptotic_constants(V, lambda, h, cut);
    d.kappa = c.kappa;
    d.phi_norm_sq = c.phi_norm_sq;
    d.product = c.product;
    rows.push_back(d);
  }
  return rows;
}

void write_wkb_csv(std::ostream& os, std::span<const WkbDiagnostic> rows) {
  os << "h,max_rel_err_y2,kappa,phi_norm_sq,product\n";
  for (const auto& r : rows)
    os << format_double(r.h) << ',' << format_double(r.max_rel_err_y2) << ',' << format_double(std::abs(r.kappa))
       << ',' << format_double(r.phi_norm_sq) << ',' << format_double(r.product) << '\n';
}

}  // namespace pseudolab
