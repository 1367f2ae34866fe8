#include "pseudolab/twist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/SVD>

#include "pseudolab/linalg.hpp"

namespace pseudolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxDoublings = 8;
constexpr double kNormTol = 1e-9;

using Triplets = std::vector<Eigen::Triplet<Complex>>;

CSparse from_triplets(Eigen::Index n, const Triplets& t) {
  CSparse M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

/// Tridiagonal -h^2 d^2/dx^2 + diag(v) into the block starting at `offset`.
void add_block(Triplets& t, std::size_t n, std::size_t offset, double s, const std::vector<Complex>& v) {
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = static_cast<Eigen::Index>(offset + j);
    t.emplace_back(r, r, 2.0 * s + v[j]);
    if (j + 1 < n) {
      t.emplace_back(r, r + 1, -s);
      t.emplace_back(r + 1, r, -s);
    }
  }
}

struct NodeData {
  std::vector<double> x, theta, cos_t, sin_t;
  std::vector<Complex> v, v1, v2;
};

NodeData node_data(const TwistConfig& cfg) {
  NodeData d;
  d.x = cfg.grid.nodes();
  d.v = node_values(cfg.V, cfg.grid);
  const double scale = std::pow(cfg.h, cfg.g_exp);
  for (std::size_t j = 0; j < d.x.size(); ++j) {
    const double th = twist_angle((d.x[j] - cfg.c) / scale);
    d.theta.push_back(th);
    d.cos_t.push_back(std::cos(th));
    d.sin_t.push_back(std::sin(th));
    const bool right = d.x[j] > cfg.c;
    d.v1.push_back(right ? d.v[j] : Complex(cfg.m, 0.0));
    d.v2.push_back(right ? Complex(cfg.m, 0.0) : d.v[j]);
  }
  return d;
}

Eigen::Matrix2cd g_block(const TwistConfig& cfg, const NodeData& d, std::size_t j) {
  const Complex w = cfg.m - d.v[j];
  const double C = d.cos_t[j], S = d.sin_t[j];
  const bool right = d.x[j] > cfg.c;
  const Complex diag = w * (right ? S * S : -C * C);
  Eigen::Matrix2cd g;
  g << diag, w * C * S, w * C * S, -diag;
  return g;
}

struct Multipliers {
  double P = 0.0, Q = 0.0, G = 0.0, G_l1 = 0.0;
};

Multipliers multipliers(const TwistConfig& cfg, const NodeData& d) {
  Multipliers out;
  const double scale = std::pow(cfg.h, cfg.g_exp);
  const double dx = cfg.grid.dx();
  for (std::size_t j = 0; j < d.x.size(); ++j) {
    const double dtheta = twist_angle_slope((d.x[j] - cfg.c) / scale) / scale;
    out.P = std::max(out.P, 2.0 * cfg.h * cfg.h * std::abs(dtheta));
    out.Q = std::max(out.Q, cfg.h * cfg.h * dtheta * dtheta);
    const double gn = Eigen::JacobiSVD<Eigen::Matrix2cd>(g_block(cfg, d, j)).singularValues()(0);
    out.G = std::max(out.G, gn);
    out.G_l1 += dx * gn;
  }
  return out;
}

}  // namespace

double twist_angle(double s) {
  if (s <= -1.0 / 3.0) return kPi / 2.0;
  if (s >= 1.0 / 3.0) return 0.0;
  return kPi * (1.0 - 3.0 * s) / 4.0;
}

double twist_angle_slope(double s) { return std::abs(s) < 1.0 / 3.0 ? -3.0 * kPi / 4.0 : 0.0; }

double TwistConfig::zone_radius() const { return std::pow(h, g_exp) / 3.0; }

std::size_t TwistConfig::nodes_in_zone() const {
  const double r = zone_radius();
  std::size_t count = 0;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (std::abs(grid.node(j) - c) < r) ++count;
  return count;
}

void TwistConfig::validate(std::size_t min_zone_nodes) const {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  if (!(g_exp > 0.0 && g_exp < 1.0)) throw DomainError("g_exp must lie in (0, 1)");
  if (V.piece_count() != 1) throw DomainError("the twisting demonstration needs V continuous on the closed interval");
  if (grid.a() != V.a() || grid.b() != V.b()) throw DomainError("grid and potential live on different intervals");
  const double r = zone_radius();
  if (!(c - r > V.a() && c + r < V.b())) throw DomainError("transition zone leaves the interval");
  if (nodes_in_zone() < min_zone_nodes)
    throw DomainError("transition zone under-resolved: " + std::to_string(nodes_in_zone()) + " nodes, need " +
                      std::to_string(min_zone_nodes));
  if (std::abs(grid.node(grid.nearest(c)) - c) < 1e-9 * grid.dx()) throw DomainError("a grid node sits on the cut c");
  double max_re = -1e300;
  for (const Complex& v : sample_range(V, 256)) max_re = std::max(max_re, v.real());
  if (!(m >= max_re)) throw DomainError("m must be at least max Re V");
}

Grid twist_grid(const Potential& V, double c, double g_exp, double h, std::size_t min_zone_nodes) {
  const double r = std::pow(h, g_exp) / 3.0;
  const double dx = 2.0 * r / static_cast<double>(min_zone_nodes + 1);
  auto n = static_cast<std::size_t>(std::ceil(V.length() / dx));
  for (;; ++n) {
    const Grid g(V.a(), V.b(), n);
    std::size_t inside = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(g.node(j) - c) < r) ++inside;
    if (inside >= min_zone_nodes && std::abs(g.node(g.nearest(c)) - c) >= 1e-9 * g.dx()) return g;
  }
}

double flattening_constant(const Potential& V, double c, Complex lambda) {
  double max_re = -1e300;
  for (const Complex& v : sample_range(V, kDefaultRangeSamples)) max_re = std::max(max_re, v.real());
  double m = std::max(max_re + std::abs(lambda) + 1.0, 1.0);
  for (int k = 0; k <= kMaxDoublings; ++k, m *= 2.0) {
    const double d1 = dist_to_conv_phi(lambda, build_phi_region(V.flattened(c, m, true)));
    const double d2 = dist_to_conv_phi(lambda, build_phi_region(V.flattened(c, m, false)));
    if (d1 > 0.0 && d2 > 0.0) return m;
  }
  throw DomainError("λ stays inside conv Φ of a flattened potential for every tried m");
}

Potential twist_v1(const TwistConfig& cfg) { return cfg.V.flattened(cfg.c, cfg.m, true); }
Potential twist_v2(const TwistConfig& cfg) { return cfg.V.flattened(cfg.c, cfg.m, false); }

TwistMatrices assemble_twist(const TwistConfig& cfg) {
  cfg.validate();
  const NodeData d = node_data(cfg);
  const std::size_t n = d.x.size();
  const auto N = static_cast<Eigen::Index>(2 * n);
  const double dx = cfg.grid.dx();
  const double s = cfg.h * cfg.h / (dx * dx);
  const std::vector<Complex> mv(n, Complex(cfg.m, 0.0));

  TwistMatrices M;
  M.theta = d.theta;
  {
    Triplets t;
    add_block(t, n, 0, s, d.v);
    add_block(t, n, n, s, mv);
    M.H1 = from_triplets(N, t);
  }
  {
    Triplets t;
    add_block(t, n, 0, s, d.v1);
    add_block(t, n, n, s, d.v2);
    M.H2 = from_triplets(N, t);
  }
  {
    Triplets t;
    for (std::size_t j = 0; j < n; ++j) {
      const auto f = static_cast<Eigen::Index>(j), g = static_cast<Eigen::Index>(n + j);
      t.emplace_back(f, f, d.cos_t[j]);
      t.emplace_back(f, g, d.sin_t[j]);
      t.emplace_back(g, f, -d.sin_t[j]);
      t.emplace_back(g, g, d.cos_t[j]);
    }
    M.U = from_triplets(N, t);
  }
  const CSparse Ut = M.U.transpose();
  M.T = CSparse(M.U * M.H1 * Ut);

  Triplets tp, tq, td, tg;
  const auto no = static_cast<Eigen::Index>(n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const auto a = static_cast<Eigen::Index>(j), b = a + 1;
    const double slope = (d.theta[j + 1] - d.theta[j]) / dx;
    const double p = 2.0 * cfg.h * cfg.h * slope / (2.0 * dx);
    // J = [[0, 1], [-1, 0]] acting on (f, g).
    tp.emplace_back(a, no + b, p);
    tp.emplace_back(b, no + a, -p);
    tp.emplace_back(no + a, b, -p);
    tp.emplace_back(no + b, a, p);
    const double q = 0.5 * cfg.h * cfg.h * slope * slope;
    for (Eigen::Index off : {Eigen::Index{0}, no}) {
      tq.emplace_back(off + a, off + b, q);
      tq.emplace_back(off + b, off + a, q);
      td.emplace_back(off + a, off + b, 0.5 / dx);
      td.emplace_back(off + b, off + a, -0.5 / dx);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Matrix2cd g = g_block(cfg, d, j);
    const auto f = static_cast<Eigen::Index>(j), gi = static_cast<Eigen::Index>(n + j);
    tg.emplace_back(f, f, g(0, 0));
    tg.emplace_back(f, gi, g(0, 1));
    tg.emplace_back(gi, f, g(1, 0));
    tg.emplace_back(gi, gi, g(1, 1));
  }
  M.PD = from_triplets(N, tp);
  M.Q = from_triplets(N, tq);
  M.D = from_triplets(N, td);
  M.G = from_triplets(N, tg);

  const Multipliers mult = multipliers(cfg, d);
  M.norm_P = mult.P;
  M.norm_Q = mult.Q;
  M.norm_G = mult.G;
  M.norm_G_l1 = mult.G_l1;
  return M;
}

ConjugationResidual verify_conjugation(const TwistConfig& cfg) {
  const TwistMatrices M = assemble_twist(cfg);
  const CSparse R = M.T - (M.H2 + M.PD + M.Q + M.G);
  const CSparse Rt = R.adjoint();
  ConjugationResidual out;
  out.spectral = spectral_norm(R, kNormTol).value;
  out.uncorrected = spectral_norm(CSparse(M.T - M.H2), kNormTol).value;

  const std::size_t n = cfg.grid.size();
  CMatrix H0 = free_laplacian(cfg.grid, cfg.h);
  H0.diagonal().array() += 1.0;
  const LuFactors lu(H0);
  const auto no = static_cast<Eigen::Index>(n);
  auto block_solve = [&](const CVector& v, bool adjoint) {
    CVector out_v(v.size());
    out_v.head(no) = adjoint ? lu.adjoint_solve(v.head(no)) : lu.solve(v.head(no));
    out_v.tail(no) = adjoint ? lu.adjoint_solve(v.tail(no)) : lu.solve(v.tail(no));
    return out_v;
  };
  out.graph = operator_norm([&](const CVector& v) -> CVector { return R * block_solve(v, false); },
                            [&](const CVector& v) -> CVector { return block_solve(Rt * v, true); }, 2 * no, kNormTol)
                  .value;
  return out;
}

ScalingFit scaling_sweep(const TwistConfig& tmpl, std::span<const double> hs) {
  if (hs.size() < 3) throw DomainError("scaling sweep needs at least 3 values of h");
  ScalingFit fit;
  for (double h : hs) {
    TwistConfig cfg = tmpl;
    cfg.h = h;
    cfg.grid = twist_grid(cfg.V, cfg.c, cfg.g_exp, h);
    cfg.validate();
    const Multipliers m = multipliers(cfg, node_data(cfg));
    fit.h.push_back(h);
    fit.norm_P.push_back(m.P);
    fit.norm_Q.push_back(m.Q);
    fit.norm_G.push_back(m.G);
    fit.norm_G_l1.push_back(m.G_l1);
  }
  fit.slope_P = loglog_slope(fit.h, fit.norm_P);
  fit.slope_Q = loglog_slope(fit.h, fit.norm_Q);
  fit.slope_G = loglog_slope(fit.h, fit.norm_G);
  fit.slope_G_l1 = loglog_slope(fit.h, fit.norm_G_l1);
  return fit;
}

TwistSweep resolvent_difference_sweep(const TwistConfig& tmpl, Complex lambda, std::span<const double> hs) {
  TwistSweep sweep;
  for (double h : hs) {
    TwistConfig cfg = tmpl;
    cfg.h = h;
    cfg.grid = twist_grid(cfg.V, cfg.c, cfg.g_exp, h);
    const TwistMatrices M = assemble_twist(cfg);
    const NodeData d = node_data(cfg);
    const std::size_t n = d.x.size();
    const auto no = static_cast<Eigen::Index>(n);

    const CMatrix L = free_laplacian(cfg.grid, h);
    auto shifted = [&](const std::vector<Complex>& v) {
      CMatrix A = L;
      for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += v[j] - lambda;
      return LuFactors(A);
    };
    const LuFactors A = shifted(d.v);
    const LuFactors B = shifted(std::vector<Complex>(n, Complex(cfg.m, 0.0)));
    const LuFactors A1 = shifted(d.v1);
    const LuFactors A2 = shifted(d.v2);
    if (A.singular() || B.singular() || A1.singular() || A2.singular()) {
      sweep.warnings.push_back("h = " + format_double(h) + ": λ is an eigenvalue; point dropped");
      continue;
    }

    Eigen::ArrayXd C(no), S(no);
    for (std::size_t j = 0; j < n; ++j) {
      C(static_cast<Eigen::Index>(j)) = d.cos_t[j];
      S(static_cast<Eigen::Index>(j)) = d.sin_t[j];
    }
    auto rotate = [&](const CVector& v, bool transpose) {
      CVector out(v.size());
      const double sg = transpose ? -1.0 : 1.0;
      out.head(no) = (C * v.head(no).array() + sg * S * v.tail(no).array()).matrix();
      out.tail(no) = (-sg * S * v.head(no).array() + C * v.tail(no).array()).matrix();
      return out;
    };
    auto pair_solve = [&](const LuFactors& top, const LuFactors& bottom, const CVector& v, bool adjoint) {
      CVector out(v.size());
      out.head(no) = adjoint ? top.adjoint_solve(v.head(no)) : top.solve(v.head(no));
      out.tail(no) = adjoint ? bottom.adjoint_solve(v.tail(no)) : bottom.solve(v.tail(no));
      return out;
    };
    // (U H1 U^T - λ)^{-1} = U (H1 - λ)^{-1} U^T.
    auto twisted = [&](const CVector& v) { return rotate(pair_solve(A, B, rotate(v, true), false), false); };
    auto twisted_adj = [&](const CVector& v) { return rotate(pair_solve(A, B, rotate(v, true), true), false); };
    auto flat = [&](const CVector& v) { return pair_solve(A1, A2, v, false); };
    auto flat_adj = [&](const CVector& v) { return pair_solve(A1, A2, v, true); };

    const Eigen::Index N = 2 * no;
    TwistRow row;
    row.h = h;
    row.m = cfg.m;
    row.norm_P = M.norm_P;
    row.norm_Q = M.norm_Q;
    row.norm_G = M.norm_G;
    row.res_diff = operator_norm([&](const CVector& v) -> CVector { return twisted(v) - flat(v); },
                                 [&](const CVector& v) -> CVector { return twisted_adj(v) - flat_adj(v); }, N, kNormTol)
                       .value;
    row.resolvent_h1 = operator_norm(twisted, twisted_adj, N, kNormTol).value;
    row.resolvent_h2 = operator_norm(flat, flat_adj, N, kNormTol).value;
    const CSparse PDt = M.PD.adjoint(), Dt = M.D.adjoint();
    const double pd_r = operator_norm([&](const CVector& v) -> CVector { return M.PD * twisted(v); },
                                      [&](const CVector& v) -> CVector { return twisted_adj(PDt * v); }, N, kNormTol)
                            .value;
    row.beta = operator_norm([&](const CVector& v) -> CVector { return M.D * twisted(v); },
                             [&](const CVector& v) -> CVector { return twisted_adj(Dt * v); }, N, kNormTol)
                   .value;
    const CSparse R = M.T - (M.H2 + M.PD + M.Q + M.G);
    const double q_edge = spectral_norm(M.Q, kNormTol).value;
    const double g_full = spectral_norm(M.G, kNormTol).value;
    const double r_norm = spectral_norm(R, kNormTol).value;
    row.bound_rhs = row.resolvent_h2 * (pd_r + (q_edge + g_full + r_norm) * row.resolvent_h1);
    sweep.rows.push_back(row);
  }
  if (sweep.rows.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& r : sweep.rows) {
      x.push_back(r.h);
      y.push_back(r.res_diff);
    }
    sweep.slope = loglog_slope(x, y);
  }
  return sweep;
}

void write_twist_csv(std::ostream& os, std::span<const TwistRow> rows) {
  os << "h,norm_P,norm_Q,norm_G,res_diff,bound_rhs\n";
  for (const auto& r : rows)
    os << format_double(r.h) << ',' << format_double(r.norm_P) << ',' << format_double(r.norm_Q) << ','
       << format_double(r.norm_G) << ',' << format_double(r.res_diff) << ',' << format_double(r.bound_rhs) << '\n';
}

}  // namespace pseudolab
