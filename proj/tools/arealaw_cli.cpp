#include "arealaw/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using arealaw::runner::Command;
using arealaw::runner::Overrides;

struct Options {
  std::string config;
  std::string out = "out";
  Overrides ov;
};

// CLI11 cannot bind std::optional<T> directly on every version; go through
// plain values and copy over the ones that were given.
struct Raw {
  std::uint64_t seed = 0;
  double t_max = 0.0, c = 0.0, omega = 0.0, beta = 0.0, eta = 0.0, j = 0.0;
  std::size_t steps = 0;
  int nmax = 0, count = 0, max_order = 0;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Options& o, Raw& raw) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", o.config, "scenario config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_option("--seed", raw.seed, "seed for random models and ensembles");
  sub->add_option("--tmax", raw.t_max, "time grid end");
  sub->add_option("--steps", raw.steps, "number of grid points");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact bipartite dynamics, entanglement rates and divisibility checks"};
  app.require_subcommand(1);
  Options o;
  Raw raw;

  CLI::App* simulate = add_command(app, "simulate", "entropy trace of a bipartite model", o, raw);
  simulate->add_option("--c", raw.c, "bound constant c (default 2)");
  CLI::App* bound = add_command(app, "bound", "entanglement rate vs area-law bound", o, raw);
  bound->add_option("--c", raw.c, "bound constant c (default 2)");
  bound->add_option("--count", raw.count, "ensemble size");
  CLI::App* divis = add_command(app, "divisibility", "semi-group test of the reduced map", o, raw);
  CLI::App* sb = add_command(app, "spinboson", "spin-boson closed forms vs exact evolution", o, raw);
  sb->add_option("--omega", raw.omega, "rotation frequency");
  sb->add_option("--beta", raw.beta, "oscillator quantum");
  sb->add_option("--eta", raw.eta, "coupling strength");
  sb->add_option("--j", raw.j, "spin (half-integer)");
  sb->add_option("--nmax", raw.nmax, "boson truncation");
  sb->add_option("--c", raw.c, "bound constant c (default 2)");
  CLI::App* zs = add_command(app, "zassenhaus", "truncation order scan", o, raw);
  zs->add_option("--max-order", raw.max_order, "scan orders 1..N");
  zs->add_option("--nmax", raw.nmax, "boson truncation for spin-boson generators");
  zs->add_option("--eta", raw.eta, "coupling for spin-boson generators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return arealaw::runner::kValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  auto given = [chosen](const char* flag) {
    try {
      return chosen->get_option(flag)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  if (given("--seed")) o.ov.seed = raw.seed;
  if (given("--tmax")) o.ov.t_max = raw.t_max;
  if (given("--steps")) o.ov.steps = raw.steps;
  if (given("--c")) o.ov.c = raw.c;
  if (given("--omega")) o.ov.omega = raw.omega;
  if (given("--beta")) o.ov.beta = raw.beta;
  if (given("--eta")) o.ov.eta = raw.eta;
  if (given("--j")) o.ov.j = raw.j;
  if (given("--nmax")) o.ov.nmax = raw.nmax;
  if (given("--count")) o.ov.count = raw.count;
  if (given("--max-order")) o.ov.max_order = raw.max_order;

  Command cmd = Command::simulate;
  if (chosen == bound) cmd = Command::bound;
  if (chosen == divis) cmd = Command::divisibility;
  if (chosen == sb) cmd = Command::spinboson;
  if (chosen == zs) cmd = Command::zassenhaus;

  std::optional<std::string> config;
  if (!o.config.empty()) config = o.config;
  const int status = arealaw::runner::execute(cmd, config, o.ov, o.out, std::cerr);
  if (status == arealaw::runner::kOk) {
    std::cout << "wrote outputs to " << o.out << "\n";
  }
  return status;
}
