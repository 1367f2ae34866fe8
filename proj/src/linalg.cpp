#include "pseudolab/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace pseudolab {

namespace {

constexpr int kMaxInverseIterations = 100;
constexpr Eigen::Index kDirectFallbackMax = 1200;
constexpr int kMaxPowerIterations = 10000;

bool all_finite(const CVector& v) { return v.allFinite(); }

}  // namespace

LuFactors::LuFactors(const CMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("LU needs a square matrix");
  lu_.compute(A);
  const double amax = A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
  const auto& lu = lu_.matrixLU();
  double pmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < lu.rows(); ++k) pmin = std::min(pmin, std::abs(lu(k, k)));
  singular_ = !(pmin >= 1e-14 * amax) || amax == 0.0;
  rcond_ = singular_ ? 0.0 : lu_.rcond();
  lu_adjoint_ = lu.adjoint();
}

CVector LuFactors::solve(const CVector& b) const { return lu_.solve(b); }

CVector LuFactors::adjoint_solve(const CVector& b) const {
  // A^* = U^* L^* P with P A = L U.
  CVector w = lu_adjoint_.triangularView<Eigen::Lower>().solve(b);
  lu_adjoint_.triangularView<Eigen::UnitUpper>().solveInPlace(w);
  return lu_.permutationP().transpose() * w;
}



CMatrix LuFactors::lower() const {
  CMatrix L = lu_.matrixLU().triangularView<Eigen::UnitLower>();
  return L;
}

CMatrix LuFactors::upper() const {
  CMatrix U = lu_.matrixLU().triangularView<Eigen::Upper>();
  return U;
}

CMatrix LuFactors::permutation() const {
  CMatrix P = lu_.permutationP();
  return P;
}

LuFactors lu_factor(const CMatrix& A) { return LuFactors(A); }

CVector seeded_unit_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  CVector v(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double re = uniform();
    const double im = uniform();
    v(k) = {re, im};
  }
  return v / v.norm();
}

NormEstimate resolvent_norm(const CMatrix& A, Complex lambda, double tol, std::uint64_t seed) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("resolvent_norm tolerance must lie in (0, 1)");
  CMatrix shifted = A;
  shifted.diagonal().array() -= lambda;
  const LuFactors lu(shifted);
  NormEstimate out;
  if (lu.singular()) {
    out.value = std::numeric_limits<double>::infinity();
    out.infinite = true;
    return out;
  }

  // est_k = ||M^{-1} x_k||^2 is a Rayleigh quotient of (M M^*)^{-1}; it
  // increases monotonically to 1 / σ_min^2.
  const Eigen::Index n = A.rows();
  CVector x = seeded_unit_vector(n, seed);
  double est = 0.0;
  out.converged = false;
  for (int it = 1; it <= kMaxInverseIterations; ++it) {
    const CVector y = lu.solve(x);
    CVector z = lu.adjoint_solve(y);
    if (!all_finite(y) || !all_finite(z)) {
      out.value = std::numeric_limits<double>::infinity();
      out.infinite = true;
      out.iterations = it;
      return out;
    }
    const double next = y.squaredNorm();
    out.iterations = it;
    const bool done = it > 1 && std::abs(next - est) <= tol * next;
    est = std::max(est, next);
    if (done) {
      out.converged = true;
      break;
    }
    x = z / z.norm();
  }
  out.value = std::sqrt(est);
  if (!out.converged && n <= kDirectFallbackMax) {
    // Clustered σ_min: take it from the full singular values.
    const double smin = Eigen::BDCSVD<CMatrix>(shifted).singularValues()(n - 1);
    out.value = smin > 0.0 ? std::max(out.value, 1.0 / smin) : std::numeric_limits<double>::infinity();
    out.infinite = !(smin > 0.0);
    out.converged = true;
    out.direct = true;
  }
  return out;
}

NormEstimate operator_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index cols, double tol,
                           std::uint64_t seed) {
  NormEstimate out;
  if (cols == 0) return out;
  CVector x = seeded_unit_vector(cols, seed);
  double est = 0.0;
  out.converged = false;
  for (int it = 1; it <= kMaxPowerIterations; ++it) {
    const CVector y = apply(x);
    const double next = y.squaredNorm();
    out.iterations = it;
    CVector z = apply_adjoint(y);
    const double zn = z.norm();
    const bool done = (it > 1 && std::abs(next - est) <= tol * next) || zn == 0.0;
    est = std::max(est, next);
    if (done) {
      out.converged = true;
      break;
    }
    x = z / zn;
  }
  out.value = std::sqrt(est);
  return out;
}

NormEstimate spectral_norm(const CMatrix& A, double tol, std::uint64_t seed) {
  return operator_norm([&A](const CVector& v) -> CVector { return A * v; },
                       [&A](const CVector& v) -> CVector { return A.adjoint() * v; }, A.cols(), tol, seed);
}

NormEstimate spectral_norm(const CSparse& A, double tol, std::uint64_t seed) {
  const CSparse At = A.adjoint();
  return operator_norm([&A](const CVector& v) -> CVector { return A * v; },
                       [&At](const CVector& v) -> CVector { return At * v; }, A.cols(), tol, seed);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) throw std::invalid_argument("slope fit needs positive data");
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Complex LambdaGrid::point(std::size_t ix, std::size_t iy) const {
  const double re = nx > 1 ? re_min + (re_max - re_min) * static_cast<double>(ix) / static_cast<double>(nx - 1) : re_min;
  const double im = ny > 1 ? im_min + (im_max - im_min) * static_cast<double>(iy) / static_cast<double>(ny - 1) : im_min;
  return {re, im};
}

void LambdaGrid::validate() const {
  if (nx == 0 || ny == 0) throw std::invalid_argument("λ-grid needs at least one point");
  if (re_max < re_min || im_max < im_min) throw std::invalid_argument("λ-grid bounds are reversed");
  if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max))
    throw std::invalid_argument("λ-grid bounds must be finite");
}

std::pair<double, double> ResolventMap::finite_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : log10_norm) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) return {std::nan(""), std::nan("")};
  return {lo, hi};
}

double ResolventMap::fraction_at_least(double level) const {
  if (log10_norm.empty()) return 0.0;
  std::size_t count = 0;
  for (double v : log10_norm)
    if (v >= level) ++count;
  return static_cast<double>(count) / static_cast<double>(log10_norm.size());
}

ResolventMap pseudospectra_map(const CMatrix& A, const LambdaGrid& grid, const MapOptions& opts) {
  grid.validate();
  ResolventMap map;
  map.grid = grid;
  const std::size_t total = grid.size();
  map.log10_norm.assign(total, 0.0);
  std::vector<char> inf(total, 0), conv(total, 1);

  auto evaluate = [&](std::size_t k) {
    const Complex lambda = grid.point(k % grid.nx, k / grid.nx);
    const NormEstimate r = resolvent_norm(A, lambda, opts.tol, opts.seed);
    map.log10_norm[k] = r.infinite ? std::numeric_limits<double>::infinity() : std::log10(r.value);
    inf[k] = r.infinite;
    conv[k] = r.converged;
  };
  auto worker = [&](unsigned t, unsigned stride) {
    for (std::size_t j = t; j < total; j += stride) evaluate(opts.reverse_order ? total - 1 - j : j);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (auto& th : pool) th.join();
  }
  map.infinite.assign(inf.begin(), inf.end());
  map.converged.assign(conv.begin(), conv.end());
  return map;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_map_csv(std::ostream& os, const ResolventMap& map) {
  os << "re,im,log10norm\n";
  for (std::size_t iy = 0; iy < map.grid.ny; ++iy)
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      const Complex l = map.grid.point(ix, iy);
      os << format_double(l.real()) << ',' << format_double(l.imag()) << ','
         << format_double(map.log10_norm[ix + map.grid.nx * iy]) << '\n';
    }
}

void write_map_pgm(std::ostream& os, const ResolventMap& map) {
  auto [lo, hi] = map.finite_range();
  os << "P5\n" << map.grid.nx << ' ' << map.grid.ny << "\n255\n";
  for (std::size_t r = 0; r < map.grid.ny; ++r) {
    const std::size_t iy = map.grid.ny - 1 - r;
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      const double v = map.log10_norm[ix + map.grid.nx * iy];
      unsigned char byte = 255;
      if (std::isfinite(v) && std::isfinite(lo) && hi > lo) {
        const double t = (std::clamp(v, lo, hi) - lo) / (hi - lo);
        byte = static_cast<unsigned char>(std::lround(255.0 * t));
      } else if (std::isfinite(v)) {
        byte = 0;
      }
      os.put(static_cast<char>(byte));
    }
  }
}

}  // namespace pseudolab
