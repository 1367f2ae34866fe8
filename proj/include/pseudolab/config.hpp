#pragma once

/// @file config.hpp
/// @brief key = value run configuration shared by every subcommand.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pseudolab/linalg.hpp"
#include "pseudolab/potential.hpp"

namespace pseudolab {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"map", "blowup", "bound", "eigs", "rankone", "twist", "wkbcheck"};
  return names;
}

/// One key per line, '#' starts a comment. Recognised keys:
///
///   subcommand, potential (catalog name or expression; pieces separated by
///   ';'), a, b, partition (comma list), h (comma list), lambda (comma list
///   of complex expressions such as "1+0.5*i"), re_min, re_max, im_min,
///   im_max, nx, ny, n, p, cut, search_lo, search_hi, count, g_exp, twist_c,
///   seed, threads, out.
struct RunConfig {
  std::string subcommand = "map";
  std::string potential = "linear-i";
  std::optional<double> a, b;
  std::vector<double> partition;
  std::vector<double> h{0.1};
  std::vector<Complex> lambda{Complex(1.0, 0.0)};
  LambdaGrid lambda_grid{-1.0, 3.0, -2.0, 2.0, 41, 41};
  std::size_t n = 400;
  double p = 0.5;
  double cut = 0.0;
  double search_lo = 0.0, search_hi = 20.0;
  std::size_t count = 0;
  double g_exp = 2.0 / 3.0;
  double twist_c = 0.0;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  std::string out = ".";

  /// Sets one key from its text form; throws ConfigError on unknown keys or
  /// malformed values.
  void set(std::string_view key, std::string_view value);
  /// Range checks that do not need the potential.
  void validate() const;
  /// Canonical text; parse(to_text()) reproduces every field exactly.
  std::string to_text() const;

  Potential build_potential() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Complex value of an expression without x, e.g. "-0.5" or "1+2*i".
Complex parse_complex(std::string_view text);

}  // namespace pseudolab
