#include "pseudolab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pseudolab/expr.hpp"

namespace pseudolab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(v) + "' is not a finite number");
  return out;
}

template <class Int>
Int parse_integer(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(v) + "' is not a non-negative integer");
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (auto part : split(v, ',')) out.push_back(parse_double(key, part));
  return out;
}

bool mentions_x(const ExprNode& n) {
  if (n.kind == NodeKind::Variable) return true;
  return std::any_of(n.children.begin(), n.children.end(), [](const auto& c) { return mentions_x(*c); });
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

std::string complex_text(Complex z) { return format_double(z.real()) + "+" + format_double(z.imag()) + "*i"; }

}  // namespace

Complex parse_complex(std::string_view text) {
  const Expr e = parse_expression(text);
  if (mentions_x(e.root())) throw ConfigError("'" + std::string(text) + "' must not depend on x");
  return e.evaluate(0.0);
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  try {
    if (key == "subcommand") {
      subcommand = std::string(value);
    } else if (key == "potential") {
      if (value.empty()) throw ConfigError("key 'potential' is empty");
      potential = std::string(value);
    } else if (key == "a") {
      a = parse_double(key, value);
    } else if (key == "b") {
      b = parse_double(key, value);
    } else if (key == "partition") {
      partition = parse_list(key, value);
    } else if (key == "h") {
      h = parse_list(key, value);
    } else if (key == "lambda") {
      lambda.clear();
      for (auto part : split(value, ',')) lambda.push_back(parse_complex(part));
    } else if (key == "re_min") {
      lambda_grid.re_min = parse_double(key, value);
    } else if (key == "re_max") {
      lambda_grid.re_max = parse_double(key, value);
    } else if (key == "im_min") {
      lambda_grid.im_min = parse_double(key, value);
    } else if (key == "im_max") {
      lambda_grid.im_max = parse_double(key, value);
    } else if (key == "nx") {
      lambda_grid.nx = parse_integer<std::size_t>(key, value);
    } else if (key == "ny") {
      lambda_grid.ny = parse_integer<std::size_t>(key, value);
    } else if (key == "n") {
      n = parse_integer<std::size_t>(key, value);
    } else if (key == "p") {
      p = parse_double(key, value);
    } else if (key == "cut") {
      cut = parse_double(key, value);
    } else if (key == "search_lo") {
      search_lo = parse_double(key, value);
    } else if (key == "search_hi") {
      search_hi = parse_double(key, value);
    } else if (key == "count") {
      count = parse_integer<std::size_t>(key, value);
    } else if (key == "g_exp") {
      g_exp = parse_double(key, value);
    } else if (key == "twist_c") {
      twist_c = parse_double(key, value);
    } else if (key == "seed") {
      seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "threads") {
      threads = parse_integer<unsigned>(key, value);
    } else if (key == "out") {
      out = std::string(value);
    } else {
      throw ConfigError("unknown key '" + std::string(key) + "'");
    }
  } catch (const ParseError& e) {
    throw ConfigError("key '" + std::string(key) + "': " + e.what());
  } catch (const EvalError& e) {
    throw ConfigError("key '" + std::string(key) + "': " + e.what());
  }
}

void RunConfig::validate() const {
  const auto& names = subcommand_names();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  if (h.empty()) throw ConfigError("h list is empty");
  for (double v : h)
    if (!(v > 0.0)) throw ConfigError("every h must be positive");
  if (lambda.empty()) throw ConfigError("lambda list is empty");
  if (a && b && !(*a < *b)) throw ConfigError("need a < b");
  if (!std::is_sorted(partition.begin(), partition.end())) throw ConfigError("partition must be ascending");
  try {
    lambda_grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n < 2) throw ConfigError("n must be at least 2");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("p must lie in (0, 1)");
  if (!(search_hi > search_lo)) throw ConfigError("need search_lo < search_hi");
  if (!(g_exp > 0.0 && g_exp < 1.0)) throw ConfigError("g_exp must lie in (0, 1)");
  if (threads == 0) throw ConfigError("threads must be positive");
  if (out.empty()) throw ConfigError("out must name a directory");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "subcommand = " << subcommand << '\n';
  os << "potential = " << potential << '\n';
  if (a) os << "a = " << format_double(*a) << '\n';
  if (b) os << "b = " << format_double(*b) << '\n';
  os << "partition = " << join(partition) << '\n';
  os << "h = " << join(h) << '\n';
  os << "lambda = ";
  for (std::size_t k = 0; k < lambda.size(); ++k) os << (k ? "," : "") << complex_text(lambda[k]);
  os << '\n';
  os << "re_min = " << format_double(lambda_grid.re_min) << '\n';
  os << "re_max = " << format_double(lambda_grid.re_max) << '\n';
  os << "im_min = " << format_double(lambda_grid.im_min) << '\n';
  os << "im_max = " << format_double(lambda_grid.im_max) << '\n';
  os << "nx = " << lambda_grid.nx << '\n';
  os << "ny = " << lambda_grid.ny << '\n';
  os << "n = " << n << '\n';
  os << "p = " << format_double(p) << '\n';
  os << "cut = " << format_double(cut) << '\n';
  os << "search_lo = " << format_double(search_lo) << '\n';
  os << "search_hi = " << format_double(search_hi) << '\n';
  os << "count = " << count << '\n';
  os << "g_exp = " << format_double(g_exp) << '\n';
  os << "twist_c = " << format_double(twist_c) << '\n';
  os << "seed = " << seed << '\n';
  os << "threads = " << threads << '\n';
  os << "out = " << out << '\n';
  return os.str();
}

Potential RunConfig::build_potential() const {
  const std::string base = potential.substr(0, potential.find(':'));
  if (base == "zero" || base == "linear-i" || base == "example-t5") {
    if (!partition.empty()) throw ConfigError("catalog potentials carry their own partition");
    return catalog_potential(potential, a, b);
  }
  if (!a || !b) throw ConfigError("an expression potential needs a and b");
  std::vector<std::string> pieces;
  for (auto part : split(potential, ';')) pieces.emplace_back(part);
  try {
    return parse_potential(pieces, *a, *b, partition);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pseudolab
