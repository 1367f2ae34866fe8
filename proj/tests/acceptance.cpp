// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 when every
// criterion was evaluated, whatever its verdict; 1 if one crashed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <Eigen/SVD>

#include "pseudolab/discretize.hpp"
#include "pseudolab/green.hpp"
#include "pseudolab/linalg.hpp"
#include "pseudolab/quasimode.hpp"
#include "pseudolab/twist.hpp"
#include "pseudolab/wkb.hpp"

using namespace pseudolab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int n : {8, 16, 32, 64}) {
    for (int k = 0; k < 5; ++k) {
      CMatrix A(n, n);
      for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = {g(rng), g(rng)};
      const Complex l(g(rng), g(rng));
      const CMatrix S = A - l * CMatrix::Identity(n, n);
      const double oracle = 1.0 / Eigen::JacobiSVD<CMatrix>(S).singularValues()(n - 1);
      worst = std::max(worst, std::abs(resolvent_norm(A, l).value - oracle) / oracle);
    }
  }
  return {worst <= 1e-8, "max relative error " + num(worst) + " over 20 matrices (tol 1e-8)"};
}

Verdict convex_bound() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 400;
  int checked = 0, vacuous = 0, violations = 0;
  for (const char* name : {"zero", "linear-i", "example-t5"}) {
    const Potential V = catalog_potential(name);
    const PhiRegion region = build_phi_region(V);
    const Grid grid(V.a(), V.b(), n);
    std::vector<Complex> lambdas;
    while (lambdas.size() < 50) {
      const double r = 0.2 * std::pow(5e5, u(rng));
      const double t = 2.0 * std::numbers::pi * u(rng);
      const Complex l = Complex(0.0, 0.0) + std::polar(r, t);
      if (dist_to_conv_phi(l, region) > 0.2) lambdas.push_back(l);
    }
    for (double h : {1.0, 0.1, 0.01}) {
      const OperatorMatrix A = assemble(V, h, grid);
      const double stencil = 4.0 * h * h / (grid.dx() * grid.dx());
      for (Complex l : lambdas) {
        const double slack = dist_to_conv_phi(l, region) - stencil - region.radius();
        if (!(slack > 0.0)) {
          ++vacuous;
          continue;
        }
        ++checked;
        if (!(resolvent_norm(A, l).value <= 1.0 / slack)) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checked) +
                               " checks (" + std::to_string(vacuous) + " λ with a non-positive denominator skipped)"};
}

Verdict blowup() {
  const std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  const auto rows = blowup_sweep(catalog_potential("linear-i"), 1.0, 0.5, hs);
  std::vector<double> ratios;
  for (const auto& r : rows) ratios.push_back(r.ratio);
  const double factor = rows.back().lower_bound / rows.front().lower_bound;
  const double slope = loglog_slope(hs, ratios);
  return {factor >= 4.0 && slope >= 0.35 && slope <= 0.65,
          "lower-bound factor " + num(factor) + " (need >= 4), residual slope " + num(slope) + " (need [0.35, 0.65])"};
}

Verdict resolvent_bound() {
  const std::vector<double> hs{0.05, 0.04, 0.03, 0.02};
  struct Case {
    const char* name;
    Complex lambda;
  };
  bool pass = true;
  std::string detail;
  for (const Case& c : {Case{"example-t5", 1.0}, Case{"linear-i", -0.5}}) {
    const Potential V = catalog_potential(c.name);
    std::vector<double> norms;
    for (double h : hs) norms.push_back(resolvent_norm(assemble(V, h, Grid(V.a(), V.b(), 400)), c.lambda).value);
    const double med = median(norms);
    const auto [mn, mx] = std::minmax_element(norms.begin(), norms.end());
    pass = pass && med <= 2.4;
    detail += std::string(detail.empty() ? "" : "; ") + c.name + " median " + num(med) + " (min " + num(*mn) +
              ", max " + num(*mx) + ", need <= 2.4)";
  }
  return {pass, detail};
}

Verdict rank_one() {
  struct Triple {
    Potential V;
    Complex lambda;
    double h, cut;
  };
  const std::vector<Triple> triples{{catalog_potential("zero"), -1.0, 0.5, 1.3},
                                    {catalog_potential("linear-i"), -1.0, 0.1, 0.0},
                                    {catalog_potential("linear-i"), {0.5, 0.2}, 0.1, -0.3},
                                    {catalog_potential("example-t5"), 1.0, 0.1, 0.3},
                                    {catalog_potential("example-t5"), -1.0, 0.2, 0.0}};
  double worst_rank = 0.0;
  for (const auto& t : triples) {
    const double step = t.h / 400;
    const SplitGreenKernel S = split_green_kernel(t.V, t.lambda, t.h, t.cut, step);
    const GreenKernel G = green_kernel(t.V, t.lambda, t.h, Mesh::build(t.V, step));
    std::vector<double> xs;
    for (int k = 0; k < 60; ++k) {
      const double x = t.V.a() + (t.V.b() - t.V.a()) * (k + 0.5) / 60.0;
      if (std::abs(x - t.cut) > 1e-9) xs.push_back(x);
    }
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(CMatrix(S.sample(xs) - G.sample(xs))).singularValues();
    worst_rank = std::max(worst_rank, s(1) / s(0));
  }
  const Potential lin = catalog_potential("linear-i");
  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  std::vector<double> norms;
  for (double h : hs) norms.push_back(rank_one_difference(lin, -1.0, h, 0.0, h / 200).norm);
  const double slope = loglog_slope(hs, norms);
  const double h = 0.0125;
  const double exact = rank_one_difference(lin, -1.0, h, 0.0, h / 200).norm;
  const double est = asymptotic_constants(lin, -1.0, h, 0.0).product;
  const double rel = std::abs(est - exact) / exact;
  return {worst_rank <= 1e-8 && slope >= 1.8 && slope <= 2.2 && rel <= 0.15,
          "max s2/s1 " + num(worst_rank) + " (need <= 1e-8), norm slope " + num(slope) +
              " (need [1.8, 2.2]), WKB product off by " + num(100 * rel) + "% (need <= 15%)"};
}

Verdict wkb_accuracy() {
  const Potential lin = catalog_potential("linear-i");
  const double e1 = wkb_relative_error(lin, -1.0, 0.08), e2 = wkb_relative_error(lin, -1.0, 0.04),
               e3 = wkb_relative_error(lin, -1.0, 0.02);
  const double r1 = e1 / e2, r2 = e2 / e3;
  auto ok = [](double r) { return r >= 1.6 && r <= 2.4; };
  return {ok(r1) && ok(r2), "errors " + num(e1) + ", " + num(e2) + ", " + num(e3) + "; ratios " + num(r1) + ", " +
                                num(r2) + " (need [1.6, 2.4])"};
}

Verdict realness() {
  const Potential t5 = catalog_potential("example-t5");
  const double h = 0.1;
  const auto roots = shooting_eigenvalues(t5, h, 0.0, 12.0, 3);
  // Even n keeps the jump at 0 off the grid.
  const OperatorMatrix A = assemble(t5, h, Grid(t5.a(), t5.b(), 1600));
  bool pass = roots.size() >= 3;
  std::string detail;
  for (const auto& r : roots) {
    const double norm = resolvent_norm(A, r.lambda).value;
    pass = pass && std::abs(r.lambda.imag()) < 1e-6 && r.lambda.real() > 0.0 && norm > 1e3;
    detail += (detail.empty() ? "" : "; ") + num(r.lambda.real()) + (r.lambda.imag() < 0 ? "" : "+") +
              num(r.lambda.imag()) + "i norm " + num(norm);
  }
  return {pass, std::to_string(roots.size()) + " roots: " + detail};
}

Verdict twisting() {
  const Potential V = parse_potential("i*x+2", -1.0, 1.0);
  const Complex l = 1.0;
  const double g = 2.0 / 3.0;
  TwistConfig cfg{V, 0.0, flattening_constant(V, 0.0, l), g, 0.1, twist_grid(V, 0.0, g, 0.1)};

  const TwistMatrices M = assemble_twist(cfg);
  const double r1 = resolvent_norm(CMatrix(M.H1), l).value, rt = resolvent_norm(CMatrix(M.T), l).value;
  const double invariance = std::abs(r1 - rt) / r1;

  const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  const ScalingFit fit = scaling_sweep(cfg, hs);
  const double eP = std::abs(fit.slope_P - 4.0 / 3.0) / (4.0 / 3.0);
  const double eQ = std::abs(fit.slope_Q - 2.0 / 3.0) / (2.0 / 3.0);
  const double eG = std::abs(fit.slope_G - 2.0 / 3.0) / (2.0 / 3.0);

  const TwistSweep sweep = resolvent_difference_sweep(cfg, l, hs);

  TwistConfig fine = cfg;
  fine.grid = Grid(V.a(), V.b(), 2 * cfg.grid.size() + 2);
  const ConjugationResidual a = verify_conjugation(cfg), b = verify_conjugation(fine);
  const double ratio = a.spectral / b.spectral;

  const bool pass = invariance <= 1e-10 && eP <= 0.02 && eQ <= 0.02 && eG <= 0.15 && sweep.slope >= 0.4 && ratio >= 3.0;
  return {pass, "m " + num(cfg.m) + ", invariance " + num(invariance) + " (need <= 1e-10); slopes P " +
                    num(fit.slope_P) + " Q " + num(fit.slope_Q) + " G " + num(fit.slope_G) +
                    " (need 4/3, 2/3, 2/3 within 2%, 2%, 15%; G in L1 " + num(fit.slope_G_l1) +
                    "); resolvent-difference slope " + num(sweep.slope) + " (need >= 0.4); residual ratio " +
                    num(ratio) + " (need >= 3; graph-norm ratio " + num(a.graph / b.graph) + ")"};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PSEUDOLAB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Verdict determinism() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"map", "--set n=60 --set nx=9 --set ny=7 --set h=0.2,0.1 --set threads=2"},
      {"blowup", "--set lambda=1 --set h=0.2,0.1"},
      {"bound", "--set n=100 --set h=0.2,0.1 --set lambda=-1,2+i"},
      {"eigs", "--set potential=zero --set h=1 --set search_lo=0.5 --set search_hi=10"},
      {"rankone", "--set lambda=-1 --set h=0.2,0.1"},
      {"twist", "--set potential=i*x+2 --set a=-1 --set b=1 --set lambda=1 --set h=0.2,0.1"},
      {"wkbcheck", "--set lambda=-1 --set h=0.08,0.04"}};
  const fs::path root = fs::temp_directory_path() / "pseudolab_acceptance";
  fs::remove_all(root);
  bool pass = true;
  std::string detail;
  for (const auto& [sub, args] : runs) {
    const fs::path dir = root / sub;
    fs::create_directories(dir);
    const std::string cmd = sub + " " + args + " --seed 11 --out " + dir.string();
    const int c1 = run_cli(cmd, root / (sub + ".log1"));
    const auto first = snapshot(dir);
    const int c2 = run_cli(cmd, root / (sub + ".log2"));
    const auto second = snapshot(dir);
    std::ifstream l1(root / (sub + ".log1")), l2(root / (sub + ".log2"));
    std::stringstream s1, s2;
    s1 << l1.rdbuf();
    s2 << l2.rdbuf();
    const bool same = c1 == 0 && c2 == 0 && first == second && first.size() >= 2 && s1.str() == s2.str();
    pass = pass && same;
    detail += (detail.empty() ? "" : ", ") + sub + (same ? " identical" : " DIFFERS (exit " + std::to_string(c1) + ")");
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::string report;
  for (int k = 1; k + 1 < argc; ++k)
    if (std::string(argv[k]) == "--report") report = argv[k + 1];

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 oracle-equivalence", oracle_equivalence}, {"2 convex-hull-bound", convex_bound},
      {"3 blowup", blowup},                         {"4 resolvent-bound", resolvent_bound},
      {"5 rank-one", rank_one},                     {"6 wkb-accuracy", wkb_accuracy},
      {"7 example-t5-realness", realness},          {"8 twisting", twisting},
      {"9 determinism", determinism}};

  std::ostringstream out;
  int crashed = 0, failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string line;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Verdict v = check();
      if (!v.pass) ++failed;
      line = std::string(v.pass ? "PASS " : "FAIL ") + name + ": " + v.detail;
    } catch (const std::exception& e) {
      ++crashed;
      line = "FAIL " + name + ": error: " + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << line << std::endl;
    std::clog << "  (" << num(secs) << " s)" << std::endl;
    out << line << '\n';
  }
  const std::string summary = std::to_string(criteria.size() - failed - crashed) + "/" +
                              std::to_string(criteria.size()) + " criteria pass";
  std::cout << summary << std::endl;
  out << summary << '\n';
  if (!report.empty()) std::ofstream(report) << out.str();
  return crashed ? 1 : 0;
}
