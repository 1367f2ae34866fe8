// pseudolab: resolvent-norm maps, sweeps and checks for -h^2 d^2/dx^2 + V.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pseudolab/commands.hpp"
#include "pseudolab/config.hpp"
#include "pseudolab/discretize.hpp"
#include "pseudolab/potential.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string seed;
  std::string threads;
  std::vector<std::string> sets;
  std::string dump_matrix;
  bool print_config = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key = value config file");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "seed for start vectors");
  sub->add_option("--threads", f.threads, "worker threads for maps");
  sub->add_option("--set", f.sets, "override one config key, e.g. --set h=0.1,0.05");
  sub->add_flag("--print-config", f.print_config, "print the resolved config and exit");
  sub->add_option("--dump-matrix", f.dump_matrix, "write the assembled matrix for the first h to this file and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudolab: semiclassical resolvent norms of -h^2 d^2/dx^2 + V"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"map", "log10 resolvent norm over a grid of λ (CSV + PGM)"},
      {"blowup", "quasimode residuals and certified lower bounds per h"},
      {"bound", "resolvent norm at fixed λ against 1/dist(λ, Φ(V))"},
      {"eigs", "eigenvalues by shooting"},
      {"rankone", "rank-one resolvent difference of an interior Dirichlet cut"},
      {"twist", "twisting-trick resolvent difference sweep"},
      {"wkbcheck", "WKB solutions against RK4 and the rank-one asymptotics"}};
  for (const auto& [name, help] : subs) add_common(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    pseudolab::RunConfig cfg = flags.config.empty() ? pseudolab::RunConfig{} : pseudolab::load_config(flags.config);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    for (const auto& kv : flags.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw pseudolab::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!flags.out.empty()) cfg.set("out", flags.out);
    if (!flags.seed.empty()) cfg.set("seed", flags.seed);
    if (!flags.threads.empty()) cfg.set("threads", flags.threads);
    cfg.validate();
    if (flags.print_config) {
      std::cout << cfg.to_text();
      return 0;
    }
    if (!flags.dump_matrix.empty()) {
      const pseudolab::Potential V = cfg.build_potential();
      std::ofstream os(flags.dump_matrix);
      if (!os) throw pseudolab::ConfigError("cannot write '" + flags.dump_matrix + "'");
      pseudolab::write_matrix_dump(os, pseudolab::assemble(V, cfg.h.front(), pseudolab::Grid(V.a(), V.b(), cfg.n)));
      return 0;
    }

    const pseudolab::CommandResult res = pseudolab::run_command(cfg, std::cout);
    for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
    if (!res.ok()) {
      for (const auto& f : res.failures) std::cerr << "FAIL " << f << '\n';
      return 1;
    }
    return 0;
  } catch (const pseudolab::ConfigError& e) {
    std::cerr << "FAIL config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "FAIL error: " << e.what() << '\n';
    return 3;
  }
}
