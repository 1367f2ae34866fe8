#include "pseudolab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pseudolab/expr.hpp"

namespace pseudolab {

namespace {

constexpr std::size_t kProbePoints = 17;
constexpr std::size_t kLowerBoundSamples = 64;

// Ascending Chebyshev-Lobatto points on [lo, hi].
std::vector<double> lobatto_points(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = -std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
    xs[k] = mid + half * t;
  }
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

std::vector<Complex> sample_piece(const Potential& V, std::size_t j, std::size_t n) {
  const auto& p = V.piece(j);
  const double off = V.limit_offset();
  std::vector<Complex> out;
  out.reserve(n);
  for (double x : lobatto_points(p.left + off, p.right - off, n)) out.push_back(p.rule(x));
  return out;
}

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

Potential::Potential(std::vector<PotentialPiece> pieces, std::optional<double> k_lower)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw DomainError("potential needs at least one piece");
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    const auto& p = pieces_[j];
    if (!(p.left < p.right)) throw DomainError("piece " + std::to_string(j) + " has an empty interval");
    if (!p.rule) throw DomainError("piece " + std::to_string(j) + " has no evaluation rule");
    if (j > 0 && pieces_[j - 1].right != p.left)
      throw DomainError("pieces do not tile the interval at piece " + std::to_string(j));
  }
  partition_.push_back(pieces_.front().left);
  for (const auto& p : pieces_) partition_.push_back(p.right);

  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    for (Complex v : sample_piece(*this, j, kProbePoints))
      if (!is_finite(v)) throw DomainError("potential is not finite on piece " + std::to_string(j));
    const auto& p = pieces_[j];
    for (int k = 1; k < 64; ++k) {
      const double x = p.left + (p.right - p.left) * k / 64.0;
      if (!is_finite(p.rule(x)))
        throw DomainError("potential is not finite at x = " + std::to_string(x) + " on piece " + std::to_string(j));
    }
  }

  double min_re = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pieces_.size(); ++j)
    for (Complex v : sample_piece(*this, j, kLowerBoundSamples)) min_re = std::min(min_re, v.real());
  if (k_lower) {
    if (min_re < *k_lower - 1e-12)
      throw DomainError("Re V drops below the declared lower bound " + std::to_string(*k_lower));
    k_lower_ = *k_lower;
  } else {
    k_lower_ = min_re;
  }
}

std::optional<std::size_t> Potential::piece_of(double x, double tol) const {
  if (x < a() - tol || x > b() + tol) return std::nullopt;
  for (std::size_t j = 1; j + 1 < partition_.size(); ++j)
    if (std::abs(x - partition_[j]) <= tol) return std::nullopt;
  for (std::size_t j = 0; j < pieces_.size(); ++j)
    if (x <= pieces_[j].right || j + 1 == pieces_.size()) return j;
  return std::nullopt;
}

Complex Potential::operator()(double x) const {
  const auto j = piece_of(x);
  if (!j) {
    if (x < a() || x > b()) throw DomainError("x = " + std::to_string(x) + " lies outside the interval");
    throw DomainError("x = " + std::to_string(x) + " is a partition point; V is undefined there");
  }
  return pieces_[*j].rule(x);
}

Complex Potential::limit_at(std::size_t j, bool right_end) const {
  const auto& p = pieces_[j];
  return p.rule(right_end ? p.right - limit_offset() : p.left + limit_offset());
}

bool Potential::near_partition_point(double x, double tol) const {
  for (std::size_t j = 1; j + 1 < partition_.size(); ++j)
    if (std::abs(x - partition_[j]) <= tol) return true;
  return false;
}

Potential Potential::restricted(double lo, double hi) const {
  if (!(a() <= lo && lo < hi && hi <= b())) throw DomainError("restriction interval not inside (a, b)");
  std::vector<PotentialPiece> out;
  for (const auto& p : pieces_) {
    const double l = std::max(lo, p.left);
    const double r = std::min(hi, p.right);
    if (l < r) out.push_back({l, r, p.rule, p.source});
  }
  return Potential(std::move(out));
}

Potential Potential::with_cuts(std::span<const double> cuts) const {
  std::vector<double> sorted(cuts.begin(), cuts.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<PotentialPiece> out;
  for (const auto& p : pieces_) {
    double l = p.left;
    for (double c : sorted) {
      if (c > l && c < p.right) {
        out.push_back({l, c, p.rule, p.source});
        l = c;
      }
    }
    out.push_back({l, p.right, p.rule, p.source});
  }
  return Potential(std::move(out));
}

Potential Potential::shifted(Complex s) const {
  std::vector<PotentialPiece> out;
  for (const auto& p : pieces_) {
    auto rule = p.rule;
    std::ostringstream src;
    src << "(" << p.source << ") + (" << s.real() << " + " << s.imag() << "*i)";
    out.push_back({p.left, p.right, [rule, s](double x) { return rule(x) + s; }, src.str()});
  }
  return Potential(std::move(out));
}

Potential Potential::flattened(double cut, double m, bool keep_right) const {
  if (!(a() < cut && cut < b())) throw DomainError("flattening cut must lie inside (a, b)");
  const double cuts[] = {cut};
  Potential split = with_cuts(cuts);
  std::vector<PotentialPiece> out;
  for (const auto& p : split.pieces_) {
    const bool right_side = p.left >= cut;
    if (right_side == keep_right) {
      out.push_back(p);
    } else {
      out.push_back({p.left, p.right, [m](double) { return Complex(m, 0.0); }, std::to_string(m)});
    }
  }
  return Potential(std::move(out));
}

std::string Potential::describe() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    if (j) os << "; ";
    os << pieces_[j].source << " on (" << pieces_[j].left << ", " << pieces_[j].right << ")";
  }
  return os.str();
}

Potential parse_potential(std::span<const std::string> sources, double a, double b,
                          std::span<const double> partition) {
  if (!(a < b)) throw DomainError("interval must satisfy a < b");
  for (std::size_t k = 0; k < partition.size(); ++k) {
    if (!(partition[k] > a && partition[k] < b)) throw DomainError("partition points must lie inside (a, b)");
    if (k && !(partition[k] > partition[k - 1])) throw DomainError("partition points must be strictly increasing");
  }
  const std::size_t n_pieces = partition.size() + 1;
  if (sources.size() != 1 && sources.size() != n_pieces)
    throw DomainError("expected 1 or " + std::to_string(n_pieces) + " expressions, got " +
                      std::to_string(sources.size()));

  std::vector<PotentialPiece> pieces;
  for (std::size_t j = 0; j < n_pieces; ++j) {
    const std::string& src = sources.size() == 1 ? sources[0] : sources[j];
    Expr e = parse_expression(src);
    const double l = j == 0 ? a : partition[j - 1];
    const double r = j + 1 == n_pieces ? b : partition[j];
    pieces.push_back({l, r, [e](double x) { return e.evaluate(x); }, src});
  }
  return Potential(std::move(pieces));
}

Potential parse_potential(std::string_view src, double a, double b, std::span<const double> partition) {
  const std::string s(src);
  return parse_potential(std::span<const std::string>(&s, 1), a, b, partition);
}

Potential catalog_potential(std::string_view name, std::optional<double> a, std::optional<double> b) {
  std::string base(name);
  std::string params;
  if (const auto colon = base.find(':'); colon != std::string::npos) {
    params = base.substr(colon + 1);
    base = base.substr(0, colon);
  }
  auto param = [&](const std::string& key, double fallback) {
    std::istringstream is(params);
    std::string kv;
    while (std::getline(is, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DomainError("malformed catalog parameter '" + kv + "'");
      if (kv.substr(0, eq) == key) return std::stod(kv.substr(eq + 1));
      throw DomainError("unknown catalog parameter '" + kv.substr(0, eq) + "'");
    }
    return fallback;
  };

  if (base == "zero") {
    if (!params.empty()) throw DomainError("catalog 'zero' takes no parameters");
    const double lo = a.value_or(0.0), hi = b.value_or(std::numbers::pi);
    return Potential({{lo, hi, [](double) { return Complex(0.0, 0.0); }, "0"}});
  }
  if (base == "linear-i") {
    if (!params.empty()) throw DomainError("catalog 'linear-i' takes no parameters");
    const double lo = a.value_or(-1.0), hi = b.value_or(1.0);
    return Potential({{lo, hi, [](double x) { return Complex(0.0, x); }, "i*x"}});
  }
  if (base == "example-t5") {
    const double delta = param("delta", 0.5);
    const double lo = a.value_or(-1.0), hi = b.value_or(1.0);
    if (!(lo < 0.0 && 0.0 < hi)) throw DomainError("example-t5 needs an interval around 0");
    std::ostringstream left, right;
    left.precision(17);
    right.precision(17);
    left << "i*(x-" << delta << ")";
    right << "i*(x+" << delta << ")";
    return Potential({{lo, 0.0, [delta](double x) { return Complex(0.0, x - delta); }, left.str()},
                      {0.0, hi, [delta](double x) { return Complex(0.0, x + delta); }, right.str()}});
  }
  throw DomainError("unknown catalog potential '" + std::string(name) + "'");
}

std::vector<Complex> sample_range(const Potential& V, std::size_t samples_per_piece) {
  if (samples_per_piece < 2) throw std::invalid_argument("sample_range needs at least 2 samples per piece");
  std::vector<Complex> out;
  out.reserve(samples_per_piece * V.piece_count());
  for (std::size_t j = 0; j < V.piece_count(); ++j) {
    auto s = sample_piece(V, j, samples_per_piece);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

PhiRegion::PhiRegion(std::vector<Complex> samples, double radius)
    : samples_(std::move(samples)), radius_(radius) {
  if (samples_.empty()) throw std::invalid_argument("PhiRegion needs at least one sample");
  hull_ = ConvexPolygon::hull_of(samples_);
}

PhiRegion build_phi_region(const Potential& V, std::size_t samples_per_piece) {
  auto samples = sample_range(V, samples_per_piece);
  double radius = 0.0;
  for (std::size_t j = 0; j < V.piece_count(); ++j) {
    const std::size_t base = j * samples_per_piece;
    for (std::size_t k = 1; k < samples_per_piece; ++k)
      radius = std::max(radius, std::abs(samples[base + k] - samples[base + k - 1]));
  }
  return PhiRegion(std::move(samples), radius);
}

double dist_to_phi(Complex lambda, const PhiRegion& region) {
  double best = std::numeric_limits<double>::infinity();
  for (Complex c : region.samples()) {
    best = std::min(best, ray_distance(lambda, c));
    if (best == 0.0) break;
  }
  return best;
}

double dist_to_conv_phi(Complex lambda, const PhiRegion& region) {
  const auto& hull = region.hull();
  double x_left;
  if (hull.leftmost_at(lambda.imag(), x_left) && lambda.real() >= x_left) return 0.0;
  const auto& v = hull.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    best = std::min(best, ray_distance(lambda, v[i]));
    if (v.size() > 1) best = std::min(best, segment_distance(lambda, v[i], v[(i + 1) % v.size()]));
  }
  return best;
}

double min_piece_conv_distance(Complex lambda, const Potential& V, std::size_t samples_per_piece) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < V.piece_count(); ++j) {
    const auto& p = V.piece(j);
    const PhiRegion region = build_phi_region(V.restricted(p.left, p.right), samples_per_piece);
    best = std::min(best, dist_to_conv_phi(lambda, region));
  }
  return best;
}

std::vector<double> uniform_cuts(const Potential& V, std::size_t count) {
  std::vector<double> cuts;
  for (std::size_t k = 1; k < count; ++k)
    cuts.push_back(V.a() + V.length() * static_cast<double>(k) / static_cast<double>(count));
  for (std::size_t j = 1; j + 1 < V.partition().size(); ++j) cuts.push_back(V.partition()[j]);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double x, double y) { return std::abs(x - y) <= 1e-12 * V.length(); }),
             cuts.end());
  return cuts;
}

}  // namespace pseudolab
