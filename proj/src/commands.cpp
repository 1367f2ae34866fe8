#include "pseudolab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "pseudolab/discretize.hpp"
#include "pseudolab/green.hpp"
#include "pseudolab/linalg.hpp"
#include "pseudolab/quasimode.hpp"
#include "pseudolab/twist.hpp"
#include "pseudolab/wkb.hpp"

namespace pseudolab {

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  return os;
}

template <class Writer>
void write_file(CommandResult& res, const std::string& path, Writer&& w, bool binary = false) {
  std::ofstream os = open_output(path, binary);
  w(os);
  os.close();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
  res.files.push_back(path);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CommandResult cmd_map(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  MapOptions opts;
  opts.threads = cfg.threads;
  opts.seed = cfg.seed;
  std::vector<double> areas;
  for (std::size_t k = 0; k < cfg.h.size(); ++k) {
    const double h = cfg.h[k];
    const OperatorMatrix A = assemble(V, h, Grid(V.a(), V.b(), cfg.n));
    ResolventMap map = pseudospectra_map(A.entries, cfg.lambda_grid, opts);
    map.h = h;
    map.potential_source = V.describe();
    const std::string stem = "map_" + std::to_string(k);
    write_file(res, out_path(cfg, stem + ".csv"), [&](std::ostream& os) { write_map_csv(os, map); });
    write_file(res, out_path(cfg, stem + ".pgm"), [&](std::ostream& os) { write_map_pgm(os, map); }, true);
    const auto [lo, hi] = map.finite_range();
    const double area = map.fraction_at_least(3.0);
    areas.push_back(area);
    log << "map h=" << format_double(h) << " log10norm min=" << format_double(lo) << " max=" << format_double(hi)
        << " fraction>=3: " << format_double(area) << '\n';
    const auto stalled = static_cast<std::size_t>(std::count_if(
        map.converged.begin(), map.converged.end(), [](bool c) { return !c; }));
    if (stalled) res.failures.push_back("map-convergence: " + std::to_string(stalled) + " points at h=" + format_double(h));
  }
  if (areas.size() > 1) {
    log << "area of log10norm>=3 by h:";
    for (std::size_t k = 0; k < areas.size(); ++k) log << ' ' << format_double(cfg.h[k]) << ':' << format_double(areas[k]);
    log << '\n';
  }
  return res;
}

CommandResult cmd_blowup(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  const auto rows = blowup_sweep(V, cfg.lambda.front(), cfg.p, cfg.h);
  write_file(res, out_path(cfg, "blowup.csv"), [&](std::ostream& os) { write_blowup_csv(os, rows); });
  for (const auto& r : rows) {
    log << "blowup h=" << format_double(r.h) << " ratio=" << format_double(r.ratio)
        << " lower_bound=" << format_double(r.lower_bound) << '\n';
    if (!(r.ratio <= r.bound)) res.failures.push_back("blowup-bound: residual exceeds its bound at h=" + format_double(r.h));
  }
  return res;
}

CommandResult cmd_bound(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  const PhiRegion region = build_phi_region(V);
  std::vector<double> hs = cfg.h;
  std::sort(hs.begin(), hs.end());
  const std::size_t quartile = std::max<std::size_t>(1, (hs.size() + 3) / 4);
  const double h_cut = hs[quartile - 1];

  struct Row {
    double h;
    Complex lambda;
    double norm, reference, conv_reference;
  };
  std::vector<Row> rows;
  for (double h : cfg.h) {
    const OperatorMatrix A = assemble(V, h, Grid(V.a(), V.b(), cfg.n));
    for (Complex lambda : cfg.lambda) {
      const double d = dist_to_phi(lambda, region);
      const double dc = dist_to_conv_phi(lambda, region);
      const NormEstimate r = resolvent_norm(A.entries, lambda, 1e-12, cfg.seed);
      rows.push_back({h, lambda, r.value, 1.0 / d, 1.0 / dc});
      const double slack = dc - region.radius();
      if (slack > 0.0 && !(r.value <= 1.0 / slack))
        res.failures.push_back("bound-convex: norm " + format_double(r.value) + " exceeds 1/dist at h=" +
                               format_double(h));
    }
  }
  write_file(res, out_path(cfg, "bound.csv"), [&](std::ostream& os) {
    os << "h,re,im,resolvent_norm,reference,conv_reference\n";
    for (const auto& r : rows)
      os << format_double(r.h) << ',' << format_double(r.lambda.real()) << ',' << format_double(r.lambda.imag())
         << ',' << format_double(r.norm) << ',' << format_double(r.reference) << ','
         << format_double(r.conv_reference) << '\n';
  });
  for (Complex lambda : cfg.lambda) {
    std::vector<double> small;
    for (const auto& r : rows)
      if (r.lambda == lambda && r.h <= h_cut) small.push_back(r.norm);
    const auto [mn, mx] = std::minmax_element(small.begin(), small.end());
    log << "bound lambda=" << format_double(lambda.real()) << (lambda.imag() < 0 ? "" : "+")
        << format_double(lambda.imag()) << "i reference=" << format_double(1.0 / dist_to_phi(lambda, region))
        << " smallest-quartile min=" << format_double(*mn) << " median=" << format_double(median(small))
        << " max=" << format_double(*mx) << '\n';
  }
  return res;
}

CommandResult cmd_eigs(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  std::vector<EigenRoot> all;
  for (double h : cfg.h) {
    const auto roots = shooting_eigenvalues(V, h, cfg.search_lo, cfg.search_hi, cfg.count);
    log << "eigs h=" << format_double(h) << ": " << roots.size() << " roots\n";
    all.insert(all.end(), roots.begin(), roots.end());
  }
  write_file(res, out_path(cfg, "eigs.csv"), [&](std::ostream& os) { write_eigen_csv(os, all); });
  return res;
}

CommandResult cmd_rankone(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  const Complex lambda = cfg.lambda.front();
  std::vector<RankOneKernel> ks;
  for (double h : cfg.h) {
    ks.push_back(rank_one_difference(V, lambda, h, cfg.cut));
    const auto& k = ks.back();
    const double el = std::abs(ratio(k.wronskian_left, k.wronskian) + 1.0);
    const double er = std::abs(ratio(k.wronskian_right, k.wronskian) - 1.0);
    if (!(el <= 1e-6 && er <= 1e-6))
      res.failures.push_back("rankone-wronskian: sub-interval identities off by " + format_double(std::max(el, er)) +
                             " at h=" + format_double(h));
  }
  write_file(res, out_path(cfg, "rankone.csv"), [&](std::ostream& os) {
    os << "h,kappa_re,kappa_im,phi_norm_sq,norm,resolvent_difference_norm\n";
    for (const auto& k : ks)
      os << format_double(k.h) << ',' << format_double(k.kappa.real()) << ',' << format_double(k.kappa.imag()) << ','
         << format_double(k.phi_norm_sq) << ',' << format_double(k.norm) << ','
         << format_double(k.resolvent_difference_norm) << '\n';
  });
  if (ks.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& k : ks) {
      x.push_back(k.h);
      y.push_back(k.norm);
    }
    log << "rankone norm slope=" << format_double(loglog_slope(x, y)) << '\n';
  }
  return res;
}

CommandResult cmd_twist(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  const Complex lambda = cfg.lambda.front();
  TwistConfig tmpl{V, cfg.twist_c, flattening_constant(V, cfg.twist_c, lambda), cfg.g_exp, cfg.h.front(),
                   Grid(V.a(), V.b(), 2)};
  const TwistSweep sweep = resolvent_difference_sweep(tmpl, lambda, cfg.h);
  for (const auto& w : sweep.warnings) log << "warning: " << w << '\n';
  write_file(res, out_path(cfg, "twist.csv"), [&](std::ostream& os) { write_twist_csv(os, sweep.rows); });
  for (const auto& r : sweep.rows)
    if (!(r.res_diff <= r.bound_rhs))
      res.failures.push_back("twist-bound: resolvent difference exceeds the bound chain at h=" + format_double(r.h));
  log << "twist m=" << format_double(tmpl.m) << " resolvent-difference slope=" << format_double(sweep.slope) << '\n';
  if (cfg.h.size() >= 3) {
    const ScalingFit fit = scaling_sweep(tmpl, cfg.h);
    log << "twist slopes P=" << format_double(fit.slope_P) << " Q=" << format_double(fit.slope_Q)
        << " G=" << format_double(fit.slope_G) << '\n';
  }
  return res;
}

CommandResult cmd_wkbcheck(const RunConfig& cfg, std::ostream& log) {
  CommandResult res;
  const Potential V = cfg.build_potential();
  const Complex lambda = cfg.lambda.front();
  const auto rows = wkb_sweep(V, lambda, cfg.cut, cfg.h);
  write_file(res, out_path(cfg, "wkb.csv"), [&](std::ostream& os) { write_wkb_csv(os, rows); });
  for (double h : cfg.h) {
    const WkbPair p = wkb_pair(V, lambda, h);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.y1.mesh.size(); ++k) {
      const ScaledValue w = p.y2.value(k) * p.y1.derivative(k) - p.y1.value(k) * p.y2.derivative(k);
      worst = std::max(worst, std::abs(w.value() * h / 2.0 - 1.0));
    }
    if (!(worst <= 1e-12)) res.failures.push_back("wkb-wronskian: off by " + format_double(worst) + " at h=" + format_double(h));
  }
  for (const auto& r : rows)
    log << "wkbcheck h=" << format_double(r.h) << " max_rel_err_y2=" << format_double(r.max_rel_err_y2)
        << " product=" << format_double(r.product) << '\n';
  return res;
}

CommandResult run_command(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out);
  CommandResult res;
  try {
    if (cfg.subcommand == "map") res = cmd_map(cfg, log);
    else if (cfg.subcommand == "blowup") res = cmd_blowup(cfg, log);
    else if (cfg.subcommand == "bound") res = cmd_bound(cfg, log);
    else if (cfg.subcommand == "eigs") res = cmd_eigs(cfg, log);
    else if (cfg.subcommand == "rankone") res = cmd_rankone(cfg, log);
    else if (cfg.subcommand == "twist") res = cmd_twist(cfg, log);
    else res = cmd_wkbcheck(cfg, log);
  } catch (const DomainError& e) {
    res.failures.push_back(std::string("domain: ") + e.what());
  }
  const std::string cfg_path = out_path(cfg, "run.cfg");
  write_file(res, cfg_path, [&](std::ostream& os) { os << cfg.to_text(); });
  return res;
}

}  // namespace pseudolab
