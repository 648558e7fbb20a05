// Command-line front end. Talks to the library only through the C API.
//
// Exit codes: 0 success, 1 failed self-check or simulation budget,
// 2 bad input or usage.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mosto/mosto.h"

namespace {

int exit_code(mosto_status s) {
  switch (s) {
    case MOSTO_OK: return 0;
    case MOSTO_ERR_INVARIANT:
    case MOSTO_ERR_DIVERGED:
    case MOSTO_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

int report(mosto_status s) {
  if (s != MOSTO_OK) std::fprintf(stderr, "mosto: %s\n", mosto_last_error());
  return exit_code(s);
}

// Owns a C handle for the duration of one command.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Graph = Handle<mosto_graph, mosto_graph_free>;
using Mesh = Handle<mosto_mesh, mosto_mesh_free>;
using Front = Handle<mosto_front, mosto_front_free>;
using Table = Handle<mosto_table, mosto_table_free>;

mosto_status load_mesh(const std::string& topology, const std::string& matrix, Mesh& mesh) {
  if (!matrix.empty()) return mosto_mesh_load_csv(matrix.c_str(), &mesh.p);
  Graph g;
  if (mosto_status s = mosto_graph_load(topology.c_str(), &g.p); s != MOSTO_OK) return s;
  return mosto_mesh_build(g.p, &mesh.p);
}

struct ComputeArgs {
  std::string topology, matrix, out, table_out, mesh_out;
  bool baseline = false;
};

int cmd_compute(const ComputeArgs& a) {
  Mesh mesh;
  if (int rc = report(load_mesh(a.topology, a.matrix, mesh))) return rc;
  if (!a.mesh_out.empty())
    if (int rc = report(mosto_mesh_save_csv(mesh.p, a.mesh_out.c_str()))) return rc;
  Front front;
  mosto_front_stats st{};
  if (int rc = report(mosto_front_compute(mesh.p, a.baseline ? MOSTO_ALGO_BASELINE : MOSTO_ALGO_OPTIMIZED, &front.p, &st)))
    return rc;
  if (int rc = report(mosto_front_save(front.p, a.out.c_str()))) return rc;
  if (!a.table_out.empty()) {
    Table table;
    const mosto_transfer_model m = mosto_transfer_model_default();
    if (int rc = report(mosto_table_build(front.p, &m, &table.p))) return rc;
    if (int rc = report(mosto_table_save(table.p, a.table_out.c_str()))) return rc;
  }
  std::printf("algorithm %s locations %zu entries %llu iterations %llu pair_checks %llu elapsed_ms %.3f\n",
              a.baseline ? "baseline" : "optimized", mosto_mesh_size(mesh.p),
              static_cast<unsigned long long>(st.entries), static_cast<unsigned long long>(st.iterations),
              static_cast<unsigned long long>(st.pair_checks), st.elapsed_ms);
  return 0;
}

struct CompareArgs {
  std::string topology, matrix, out;
  std::vector<int> rounds{1, 5, 10};
};

int cmd_compare(const CompareArgs& a) {
  Mesh mesh;
  if (int rc = report(load_mesh(a.topology, a.matrix, mesh))) return rc;
  Front front;
  if (int rc = report(mosto_front_compute(mesh.p, MOSTO_ALGO_OPTIMIZED, &front.p, nullptr))) return rc;
  const std::string cdf = a.out + ".cdf.csv";
  std::string summary(1 << 16, '\0');
  if (int rc = report(mosto_compare_write(front.p, a.rounds.data(), a.rounds.size(), a.out.c_str(), cdf.c_str(),
                                          summary.data(), summary.size())))
    return rc;
  std::fputs(summary.c_str(), stdout);
  return 0;
}

struct SimulateArgs {
  std::string scenario, out;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

int cmd_simulate(const SimulateArgs& a) {
  mosto_sim_summary sum{};
  std::string text(1 << 14, '\0');
  const std::uint64_t* seed = a.has_seed ? &a.seed : nullptr;
  if (int rc = report(mosto_simulate_file(a.scenario.c_str(), seed, a.out.empty() ? nullptr : a.out.c_str(), &sum,
                                          text.data(), text.size())))
    return rc;
  std::fputs(text.c_str(), stdout);
  if (!sum.stream_intact) {
    std::fprintf(stderr, "mosto: delivered byte stream differs from the source\n");
    return 1;
  }
  return 0;
}

struct LookupArgs {
  std::string table;
  std::uint32_t from = 0, to = 0;
  std::uint64_t size = 0;
};

int cmd_lookup(const LookupArgs& a) {
  Table table;
  if (int rc = report(mosto_table_load(a.table.c_str(), &table.p))) return rc;
  mosto_chain_info info{};
  std::vector<std::uint32_t> hops(64);
  mosto_status s = mosto_table_lookup(table.p, a.from, a.to, a.size, hops.data(), hops.size(), &info);
  if (s == MOSTO_ERR_ARGUMENT && info.hop_count > hops.size()) {
    hops.resize(info.hop_count);
    s = mosto_table_lookup(table.p, a.from, a.to, a.size, hops.data(), hops.size(), &info);
  }
  if (int rc = report(s)) return rc;
  std::string chain;
  for (std::size_t k = 0; k < info.hop_count; ++k) chain += (k ? "," : "") + std::to_string(hops[k]);
  std::printf("chain %s rounds %d modeled_ms %g generation %llu\n", chain.c_str(), info.rounds, info.modeled_ms,
              static_cast<unsigned long long>(info.generation));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pareto proxy-chain selection and split-TCP simulation"};
  app.require_subcommand(1);

  ComputeArgs ca;
  auto* compute = app.add_subcommand("compute", "Compute Pareto fronts for every location pair");
  auto* ct = compute->add_option("--topology", ca.topology, "Proxy graph file");
  compute->add_option("--matrix", ca.matrix, "Full-mesh RTT matrix CSV instead of a graph")->excludes(ct);
  compute->add_option("--out", ca.out, "Front output file")->required();
  compute->add_option("--table-out", ca.table_out, "Also write the chain lookup table");
  compute->add_option("--mesh-out", ca.mesh_out, "Also write the full-mesh matrix CSV");
  compute->add_flag("--baseline", ca.baseline, "Use the straightforward all-pairs recursion");

  CompareArgs cpa;
  auto* compare = app.add_subcommand("compare", "Compare selected chains with minimax chains");
  auto* cpt = compare->add_option("--topology", cpa.topology, "Proxy graph file");
  compare->add_option("--matrix", cpa.matrix, "Full-mesh RTT matrix CSV")->excludes(cpt);
  compare->add_option("--rounds", cpa.rounds, "Round counts")->delimiter(',');
  compare->add_option("--out", cpa.out, "Report CSV; the CDF goes to <out>.cdf.csv")->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a transfer scenario");
  simulate->add_option("--scenario", sa.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sa.out, "Trace CSV");
  auto* seed = simulate->add_option("--seed", sa.seed, "Override the scenario seed");

  LookupArgs la;
  auto* lookup = app.add_subcommand("lookup", "Look up the chain for a transfer");
  lookup->add_option("--table", la.table, "Table file or controller output directory")->required();
  lookup->add_option("--from", la.from)->required();
  lookup->add_option("--to", la.to)->required();
  lookup->add_option("--size", la.size, "Transfer size in bytes")->required();

  std::string config;
  auto* controller = app.add_subcommand("controller", "Run the recomputation daemon");
  controller->add_option("--config", config, "Controller config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (compute->parsed()) {
    if (ca.topology.empty() && ca.matrix.empty()) {
      std::fprintf(stderr, "mosto: compute needs --topology or --matrix\n");
      return 2;
    }
    return cmd_compute(ca);
  }
  if (compare->parsed()) {
    if (cpa.topology.empty() && cpa.matrix.empty()) {
      std::fprintf(stderr, "mosto: compare needs --topology or --matrix\n");
      return 2;
    }
    return cmd_compare(cpa);
  }
  if (simulate->parsed()) {
    sa.has_seed = seed->count() > 0;
    return cmd_simulate(sa);
  }
  if (lookup->parsed()) return cmd_lookup(la);
  if (controller->parsed()) return report(mosto_controller_run(config.c_str()));
  return 2;
}
