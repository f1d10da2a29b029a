// congestlab: command-line harness for generation, mixing, routing,
// PRAM simulation and growth reports.
#include <CLI11.hpp>
#include <iostream>

#include "congestlab/cli/commands.hpp"

using namespace congestlab;
using namespace congestlab::cli;

namespace {

void graph_flags(CLI::App* app, GraphOptions& o, bool multi_seed) {
  app->add_option("--n", o.n, "number of nodes")->required();
  app->add_option("--d", o.d, "picks per node, or 'auto' for ceil(8 ln n)")->capture_default_str();
  app->add_option("--seed", o.seed, "first seed (default: $CONGESTLAB_SEED or 1)");
  if (multi_seed) app->add_option("--seeds", o.seeds, "number of consecutive seeds")->capture_default_str();
}

void routing_flags(CLI::App* app, RoutingKnobs& k) {
  app->add_option("--beta", k.beta, "components per level split")->capture_default_str();
  app->add_option("--d0", k.d0, "level-zero degree (0: default)");
  app->add_option("--stop-size", k.stop_size, "stop splitting below this size (0: default)");
  app->add_option("--width-cap", k.width_cap, "largest admissible width (0: 4 ceil(log2 n))");
}

// Report to a file when --out is given, stdout otherwise.
struct Sink {
  std::string path;
  std::ofstream file;
  std::ostream& get() {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw UsageError("cannot write " + path);
    return file;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"congestlab: routing and PRAM simulation on random graphs"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  try {
    seed = default_seed();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  GraphOptions go;
  go.seed = seed;
  RoutingKnobs knobs;
  Sink sink;
  std::string method = "auto", program;
  std::vector<std::string> params;
  std::vector<std::size_t> grid{256, 512, 1024, 2048, 4096};
  std::size_t growth_seeds = 5;
  bool perm = false, distribute = false;

  auto* gen = app.add_subcommand("gen", "generate G(n, d) and write it as an edge list");
  graph_flags(gen, go, false);
  gen->add_option("--out", sink.path, "graph file (default: stdout)");

  auto* mix = app.add_subcommand("mixing", "mixing time of G(n, d), one JSON line per seed");
  graph_flags(mix, go, true);
  mix->add_option("--method", method, "exact, sampled or auto")->capture_default_str();

  auto* rt = app.add_subcommand("route", "route and deliver one instance per seed, one JSON line per seed");
  graph_flags(rt, go, true);
  routing_flags(rt, knobs);
  rt->add_flag("--perm", perm, "random permutation instance (default: uniform random targets)");
  rt->add_option("--out", sink.path, "report file (default: stdout)");

  auto* sim = app.add_subcommand("simulate", "run a registered PRAM program on the network and against the oracle");
  graph_flags(sim, go, true);
  sim->add_option("--program", program, "registered program name")->required();
  sim->add_option("--param", params, "program parameter key=value (repeatable)");
  sim->add_flag("--distribute", distribute, "also hand subgraph outputs to their endpoints");
  sim->add_option("--out", sink.path, "report file (default: stdout)");

  auto* gr = app.add_subcommand("growth", "median congestion, dilation and rounds over an n grid, as CSV");
  gr->add_option("--grid", grid, "node counts")->delimiter(',')->capture_default_str();
  gr->add_option("--d", go.d, "picks per node, or 'auto'")->capture_default_str();
  gr->add_option("--seed", go.seed, "first seed");
  gr->add_option("--seeds", growth_seeds, "seeds per grid point")->capture_default_str();
  routing_flags(gr, knobs);
  gr->add_option("--out", sink.path, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(go, sink.path, std::cout);
    if (*mix) return cmd_mixing(go, method, sink.get());
    if (*rt) return cmd_route(go, perm, knobs, sink.get());
    if (*sim) return cmd_simulate(go, program, params, distribute, sink.get());
    if (*gr) return cmd_growth(grid, go.d, growth_seeds, go.seed, knobs, sink.get());
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::UnknownProgram || e.kind() == ErrorKind::InvalidArgument ? kUsage : kVerifyFailed;
  }
  return kUsage;
}
