#include "pseudolab/quasimode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pseudolab/linalg.hpp"

namespace pseudolab {

namespace {

constexpr std::size_t kSimpsonPanels = 100000;
constexpr std::size_t kOscillationSamples = 101;
constexpr std::size_t kCentreCandidates = 2048;

template <class F>
double simpson_l2_norm(F f) {
  const double hstep = 2.0 / static_cast<double>(kSimpsonPanels);
  double sum = 0.0;
  for (std::size_t k = 0; k <= kSimpsonPanels; ++k) {
    const double s = -1.0 + hstep * static_cast<double>(k);
    const double w = (k == 0 || k == kSimpsonPanels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double v = f(s);
    sum += w * v * v;
  }
  return std::sqrt(sum * hstep / 3.0);
}

void check_support(const Potential& V, double c, double radius) {
  const auto j = V.piece_of(c);
  if (!j) throw DomainError("quasimode centre is not inside a continuity piece of V");
  const auto& piece = V.piece(*j);
  if (!(c - radius > piece.left && c + radius < piece.right))
    throw DomainError("quasimode support ball touches a partition point or the interval boundary; decrease h");
}

}  // namespace

double BumpFunction::value(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

double BumpFunction::derivative(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return -2.0 * s / (u * u) * value(s);
}

double BumpFunction::second_derivative(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  const double g1 = -2.0 * s / (u * u);
  const double g2 = -2.0 / (u * u) - 8.0 * s * s / (u * u * u);
  return (g2 + g1 * g1) * value(s);
}

BumpFunction::BumpFunction()
    : norm_(simpson_l2_norm(&BumpFunction::value)),
      d1_norm_(simpson_l2_norm(&BumpFunction::derivative)),
      d2_norm_(simpson_l2_norm(&BumpFunction::second_derivative)) {}

const BumpFunction& BumpFunction::standard() {
  static const BumpFunction instance;
  return instance;
}

double Quasimode::support_radius() const { return std::pow(h, p); }

CVector Quasimode::full_vector() const {
  CVector f = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
  f.segment(static_cast<Eigen::Index>(first_node), values.size()) = values;
  return f;
}

Quasimode build_quasimode(const Potential& V, double c, double gamma, double p, double h, const Grid& grid) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quasimode exponent p must lie in (0, 1)");
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const double radius = std::pow(h, p);
  check_support(V, c, radius);

  Quasimode q;
  q.c = c;
  q.gamma = gamma;
  q.p = p;
  q.h = h;
  q.lambda = V(c) + gamma * gamma;
  q.grid = grid;

  const double dx = grid.dx();
  const double lo = std::ceil((c - radius - grid.a()) / dx) - 1.0;
  const double hi = std::floor((c + radius - grid.a()) / dx) - 1.0;
  const auto first = static_cast<std::size_t>(std::clamp(lo, 0.0, static_cast<double>(grid.size() - 1)));
  const auto last = static_cast<std::size_t>(std::clamp(hi, 0.0, static_cast<double>(grid.size() - 1)));
  q.first_node = first;
  q.values = CVector::Zero(static_cast<Eigen::Index>(last >= first ? last - first + 1 : 0));
  for (std::size_t j = first; j <= last && last >= first; ++j) {
    const double x = grid.node(j);
    const double phase = gamma * x / h;
    q.values(static_cast<Eigen::Index>(j - first)) =
        std::polar(BumpFunction::value((x - c) / radius), phase);
  }
  return q;
}

Quasimode quasimode_for_lambda(const Potential& V, Complex target, double p, double h, const Grid& grid) {
  const double radius = std::pow(h, p);
  double best = std::numeric_limits<double>::infinity();
  double best_c = 0.0;
  for (std::size_t j = 0; j < V.piece_count(); ++j) {
    const auto& piece = V.piece(j);
    const double lo = piece.left + radius;
    const double hi = piece.right - radius;
    if (!(hi > lo)) continue;
    for (std::size_t k = 0; k < kCentreCandidates; ++k) {
      const double c = lo + (hi - lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(kCentreCandidates);
      const Complex d = target - V.in_piece(j, c);
      if (d.real() < -1e-12) continue;
      if (std::abs(d.imag()) < best) {
        best = std::abs(d.imag());
        best_c = c;
      }
    }
  }
  if (!std::isfinite(best))
    throw DomainError("target λ is not in Ran(V) + [0, ∞) at any admissible quasimode centre");

  // Golden-section polish of the centre within one candidate spacing.
  if (best > 0.0) {
    const std::size_t j = *V.piece_of(best_c);
    const auto& piece = V.piece(j);
    const double step = (piece.right - piece.left) / static_cast<double>(kCentreCandidates);
    double lo = std::max(best_c - step, piece.left + radius);
    double hi = std::min(best_c + step, piece.right - radius);
    auto cost = [&](double c) {
      const Complex d = target - V.in_piece(j, c);
      return d.real() < -1e-12 ? std::numeric_limits<double>::infinity() : std::abs(d.imag());
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(best_c)); ++it) {
      const double c1 = hi - g * (hi - lo);
      const double c2 = lo + g * (hi - lo);
      if (cost(c1) <= cost(c2)) hi = c2;
      else lo = c1;
    }
    const double c = 0.5 * (lo + hi);
    if (cost(c) < best) best_c = c;
  }
  const double gamma = std::sqrt(std::max((target - V(best_c)).real(), 0.0));
  Quasimode q = build_quasimode(V, best_c, gamma, p, h, grid);
  q.mismatch = std::abs(target - q.lambda);
  return q;
}

double residual_ratio(const OperatorMatrix& A, const Quasimode& q) {
  if (A.h != q.h || A.grid.size() != q.grid.size() || A.grid.a() != q.grid.a() || A.grid.b() != q.grid.b())
    throw DomainError("operator and quasimode use different h or grids");
  if (A.dim() != q.grid.size()) throw DomainError("residual_ratio needs an unsplit operator");
  const CVector f = q.full_vector();
  const double fn = f.norm();
  if (fn == 0.0) throw DomainError("quasimode vanishes on the grid; refine the grid");
  CVector r = A.entries * f - q.lambda * f;
  return r.norm() / fn;
}

double residual_ratio(const Potential& V, const Quasimode& q) {
  const double fn = q.values.norm();
  if (fn == 0.0) throw DomainError("quasimode vanishes on the grid; refine the grid");
  const double s = q.h * q.h / (q.grid.dx() * q.grid.dx());
  const auto n = static_cast<std::ptrdiff_t>(q.grid.size());
  const auto first = static_cast<std::ptrdiff_t>(q.first_node);
  const auto m = static_cast<std::ptrdiff_t>(q.values.size());
  auto f = [&](std::ptrdiff_t j) -> Complex {
    const std::ptrdiff_t k = j - first;
    return (k >= 0 && k < m) ? q.values(k) : Complex(0.0, 0.0);
  };
  double sum = 0.0;
  for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(first - 1, 0); j <= std::min(first + m, n - 1); ++j) {
    const Complex fj = f(j);
    const Complex r = s * (2.0 * fj - f(j - 1) - f(j + 1)) + (V(q.grid.node(static_cast<std::size_t>(j))) - q.lambda) * fj;
    sum += std::norm(r);
  }
  return std::sqrt(sum) / fn;
}

double residual_bound(const Potential& V, const Quasimode& q) {
  const auto& bump = BumpFunction::standard();
  const double k1 = bump.second_derivative_norm() / bump.norm();
  const double k2 = 2.0 * std::abs(q.gamma) * bump.derivative_norm() / bump.norm();
  const double radius = q.support_radius();
  const Complex vc = V(q.c);
  double osc = 0.0;
  for (std::size_t k = 0; k < kOscillationSamples; ++k) {
    const double x = q.c - radius + 2.0 * radius * static_cast<double>(k) / static_cast<double>(kOscillationSamples - 1);
    osc = std::max(osc, std::abs(V(x) - vc));
  }
  return k1 * std::pow(q.h, 2.0 - 2.0 * q.p) + k2 * std::pow(q.h, 1.0 - q.p) + osc + q.mismatch;
}

double closure_lower_bound(double L, double delta) { return L / (1.0 + delta * L); }

std::vector<BlowupPoint> blowup_sweep(const Potential& V, Complex target, double p, std::span<const double> hs) {
  std::vector<BlowupPoint> rows;
  for (double h : hs) {
    const Grid grid = Grid::with_max_spacing(V.a(), V.b(), h * h);
    const Quasimode q = quasimode_for_lambda(V, target, p, h, grid);
    BlowupPoint row;
    row.h = h;
    row.ratio = residual_ratio(V, q) + q.mismatch;
    row.bound = residual_bound(V, q);
    row.lower_bound = 1.0 / row.ratio;
    rows.push_back(row);
  }
  return rows;
}

void write_blowup_csv(std::ostream& os, std::span<const BlowupPoint> rows) {
  os << "h,ratio,bound,lower_bound_resolvent\n";
  for (const auto& r : rows)
    os << format_double(r.h) << ',' << format_double(r.ratio) << ',' << format_double(r.bound) << ','
       << format_double(r.lower_bound) << '\n';
}

}  // namespace pseudolab
