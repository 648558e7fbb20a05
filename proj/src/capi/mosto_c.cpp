#include "mosto/mosto.h"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "controller.hpp"
#include "error.hpp"
#include "pareto.hpp"
#include "report.hpp"
#include "scenario.hpp"
#include "simulator.hpp"
#include "topology.hpp"
#include "transfer_model.hpp"

struct mosto_graph {
  mosto::ProxyGraph g;
};
struct mosto_mesh {
  mosto::DistanceMatrix d;
};
struct mosto_front {
  mosto::ParetoFront f;
};
struct mosto_table {
  mosto::ChainLookupTable t;
};

namespace {

thread_local std::string g_last_error;

mosto_status fail(mosto_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename Fn>
mosto_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const mosto::InputError& e) {
    return fail(MOSTO_ERR_INPUT, e.what());
  } catch (const mosto::InvariantError& e) {
    return fail(MOSTO_ERR_INVARIANT, e.what());
  } catch (const mosto::SimulationDiverged& e) {
    return fail(MOSTO_ERR_DIVERGED, e.what());
  } catch (const mosto::IoError& e) {
    return fail(MOSTO_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MOSTO_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MOSTO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MOSTO_ERR_INTERNAL, e.what());
  }
}

mosto::TransferModel to_model(const mosto_transfer_model* m) {
  mosto::TransferModel out;
  if (m) {
    out.icw = m->icw;
    out.mss = m->mss;
    out.max_rounds = m->max_rounds;
  }
  out.validate();
  return out;
}

void copy_text(const std::string& s, char* buf, std::size_t cap) {
  if (!buf || cap == 0) return;
  const std::size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

#define MOSTO_REQUIRE(cond, what) \
  if (!(cond)) return fail(MOSTO_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* mosto_last_error(void) { return g_last_error.c_str(); }

const char* mosto_version(void) { return "0.1.0"; }

mosto_status mosto_graph_parse(const char* text, mosto_graph** out) {
  return guarded([&] {
    MOSTO_REQUIRE(text && out, "null argument");
    *out = new mosto_graph{mosto::ProxyGraph::parse(text)};
    return MOSTO_OK;
  });
}

mosto_status mosto_graph_load(const char* path, mosto_graph** out) {
  return guarded([&] {
    MOSTO_REQUIRE(path && out, "null argument");
    *out = new mosto_graph{mosto::ProxyGraph::load(path)};
    return MOSTO_OK;
  });
}

size_t mosto_graph_node_count(const mosto_graph* g) { return g ? g->g.node_count() : 0; }

void mosto_graph_free(mosto_graph* g) { delete g; }

mosto_status mosto_mesh_build(const mosto_graph* g, mosto_mesh** out) {
  return guarded([&] {
    MOSTO_REQUIRE(g && out, "null argument");
    *out = new mosto_mesh{mosto::build_full_mesh(g->g)};
    return MOSTO_OK;
  });
}

mosto_status mosto_mesh_from_ms(size_t n, const double* rows_ms, mosto_mesh** out) {
  return guarded([&] {
    MOSTO_REQUIRE(rows_ms && out, "null argument");
    std::vector<double> rows(rows_ms, rows_ms + n * n);
    *out = new mosto_mesh{mosto::DistanceMatrix::from_ms(n, rows)};
    return MOSTO_OK;
  });
}

mosto_status mosto_mesh_load_csv(const char* path, mosto_mesh** out) {
  return guarded([&] {
    MOSTO_REQUIRE(path && out, "null argument");
    *out = new mosto_mesh{mosto::DistanceMatrix::load_csv(path)};
    return MOSTO_OK;
  });
}

mosto_status mosto_mesh_save_csv(const mosto_mesh* m, const char* path) {
  return guarded([&] {
    MOSTO_REQUIRE(m && path, "null argument");
    m->d.save_csv(path);
    return MOSTO_OK;
  });
}

size_t mosto_mesh_size(const mosto_mesh* m) { return m ? m->d.size() : 0; }

double mosto_mesh_get(const mosto_mesh* m, uint32_t i, uint32_t j) {
  if (!m || i >= m->d.size() || j >= m->d.size()) return std::numeric_limits<double>::quiet_NaN();
  return m->d.at(i, j).ms();
}

void mosto_mesh_free(mosto_mesh* m) { delete m; }

mosto_status mosto_front_compute(const mosto_mesh* m, mosto_algorithm algo, mosto_front** out,
                                 mosto_front_stats* stats) {
  return guarded([&] {
    MOSTO_REQUIRE(m && out, "null argument");
    MOSTO_REQUIRE(algo == MOSTO_ALGO_OPTIMIZED || algo == MOSTO_ALGO_BASELINE, "unknown algorithm");
    mosto::ParetoStats s;
    const auto t0 = std::chrono::steady_clock::now();
    auto f = algo == MOSTO_ALGO_OPTIMIZED ? mosto::pareto_optimized(m->d, &s) : mosto::pareto_baseline(m->d, &s);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (stats) *stats = mosto_front_stats{s.iterations, s.pair_checks, s.max_pair_checks, s.state_updates, s.entries, ms};
    *out = new mosto_front{std::move(f)};
    return MOSTO_OK;
  });
}

int mosto_front_equal(const mosto_front* a, const mosto_front* b) { return a && b && a->f == b->f; }

size_t mosto_front_entry_count(const mosto_front* f) { return f ? f->f.entry_count() : 0; }

size_t mosto_front_list_size(const mosto_front* f, uint32_t i, uint32_t j) {
  if (!f || i >= f->f.size() || j >= f->f.size()) return 0;
  return f->f.at(i, j).size();
}

mosto_status mosto_front_get(const mosto_front* f, uint32_t i, uint32_t j, size_t k, uint32_t* hops,
                             size_t hops_cap, size_t* hop_count, double* length_ms, double* max_link_ms) {
  return guarded([&] {
    MOSTO_REQUIRE(f, "null front");
    MOSTO_REQUIRE(i < f->f.size() && j < f->f.size(), "location out of range");
    const auto& list = f->f.at(i, j);
    MOSTO_REQUIRE(k < list.size(), "entry index out of range");
    const auto& p = list[k];
    if (hop_count) *hop_count = p.hops.size();
    if (length_ms) *length_ms = p.length.ms();
    if (max_link_ms) *max_link_ms = p.max_link.ms();
    if (hops) {
      MOSTO_REQUIRE(hops_cap >= p.hops.size(), "hop buffer too small");
      std::copy(p.hops.begin(), p.hops.end(), hops);
    }
    return MOSTO_OK;
  });
}

mosto_status mosto_front_save(const mosto_front* f, const char* path) {
  return guarded([&] {
    MOSTO_REQUIRE(f && path, "null argument");
    std::ofstream out(path);
    if (!out) return fail(MOSTO_ERR_IO, std::string("cannot write ") + path);
    f->f.write(out);
    return out ? MOSTO_OK : fail(MOSTO_ERR_IO, std::string("write failed: ") + path);
  });
}

void mosto_front_free(mosto_front* f) { delete f; }

mosto_transfer_model mosto_transfer_model_default(void) {
  const mosto::TransferModel m;
  return mosto_transfer_model{m.icw, m.mss, m.max_rounds};
}

mosto_status mosto_rounds_for_size(const mosto_transfer_model* m, uint64_t size, int* rounds) {
  return guarded([&] {
    MOSTO_REQUIRE(rounds, "null argument");
    *rounds = mosto::rounds_for_size(size, to_model(m));
    return MOSTO_OK;
  });
}

mosto_status mosto_table_build(const mosto_front* f, const mosto_transfer_model* m, mosto_table** out) {
  return guarded([&] {
    MOSTO_REQUIRE(f && out, "null argument");
    *out = new mosto_table{mosto::build_lookup_table(f->f, to_model(m))};
    return MOSTO_OK;
  });
}

mosto_status mosto_table_load(const char* path, mosto_table** out) {
  return guarded([&] {
    MOSTO_REQUIRE(path && out, "null argument");
    std::string p = path;
    // A controller output directory names its latest table in "current".
    if (std::filesystem::is_directory(p)) {
      std::ifstream cur(std::filesystem::path(p) / "current");
      std::string name;
      if (!(cur >> name)) return fail(MOSTO_ERR_INPUT, "no published table in " + p);
      p = (std::filesystem::path(p) / name).string();
    }
    *out = new mosto_table{mosto::ChainLookupTable::load(p)};
    return MOSTO_OK;
  });
}

mosto_status mosto_table_save(const mosto_table* t, const char* path) {
  return guarded([&] {
    MOSTO_REQUIRE(t && path, "null argument");
    t->t.save(path);
    return MOSTO_OK;
  });
}

void mosto_table_free(mosto_table* t) { delete t; }

mosto_status mosto_table_lookup(const mosto_table* t, uint32_t from, uint32_t to, uint64_t size, uint32_t* hops,
                                size_t hops_cap, mosto_chain_info* info) {
  return guarded([&] {
    MOSTO_REQUIRE(t, "null table");
    const int r = mosto::rounds_for_size(size, t->t.model());
    const auto& e = t->t.lookup(from, to, r);
    if (info) *info = mosto_chain_info{r, e.hops.size(), e.modeled_ms, t->t.generation()};
    if (hops) {
      MOSTO_REQUIRE(hops_cap >= e.hops.size(), "hop buffer too small");
      std::copy(e.hops.begin(), e.hops.end(), hops);
    }
    return MOSTO_OK;
  });
}

mosto_status mosto_compare_write(const mosto_front* f, const int* rounds, size_t rounds_count, const char* csv_path,
                                 const char* cdf_path, char* summary, size_t summary_cap) {
  return guarded([&] {
    MOSTO_REQUIRE(f && rounds && csv_path && cdf_path, "null argument");
    const auto rep = mosto::compare_chains(f->f, std::vector<int>(rounds, rounds + rounds_count));
    std::ofstream csv(csv_path), cdf(cdf_path);
    if (!csv) return fail(MOSTO_ERR_IO, std::string("cannot write ") + csv_path);
    if (!cdf) return fail(MOSTO_ERR_IO, std::string("cannot write ") + cdf_path);
    rep.write_csv(csv);
    rep.write_cdf(cdf);
    copy_text(rep.summary(), summary, summary_cap);
    return MOSTO_OK;
  });
}

mosto_status mosto_chain_time(const mosto_mesh* m, const uint32_t* hops, size_t hop_count, uint64_t size,
                              const mosto_transfer_model* model, double* modeled_ms, double* simulated_ms) {
  return guarded([&] {
    MOSTO_REQUIRE(m && hops, "null argument");
    for (size_t k = 0; k < hop_count; ++k)
      if (hops[k] >= m->d.size()) return fail(MOSTO_ERR_INPUT, "chain names an unknown location");
    const auto tm = to_model(model);
    const auto path = mosto::make_path(m->d, std::vector<mosto::NodeId>(hops, hops + hop_count));
    if (modeled_ms) *modeled_ms = mosto::chain_time_ms(path, mosto::rounds_for_size(size, tm));
    if (simulated_ms) *simulated_ms = mosto::simulate_chain_transfer(path, size, m->d, tm);
    return MOSTO_OK;
  });
}

mosto_status mosto_simulate_file(const char* scenario_path, const uint64_t* seed, const char* trace_path,
                                 mosto_sim_summary* out, char* text, size_t text_cap) {
  return guarded([&] {
    MOSTO_REQUIRE(scenario_path, "null argument");
    auto sc = mosto::load_scenario(scenario_path);
    if (seed) sc.sim.seed = *seed;
    const auto r = mosto::simulate(sc.hops, sc.size, sc.sim, sc.offload);
    if (trace_path) {
      std::ofstream tr(trace_path);
      if (!tr) return fail(MOSTO_ERR_IO, std::string("cannot write ") + trace_path);
      mosto::write_trace_csv(tr, r.trace);
    }
    if (out) {
      *out = mosto_sim_summary{};
      out->completed = r.completed;
      out->completion_ms = r.completion_ms;
      out->bytes_delivered = r.delivered;
      out->stream_intact = r.stream_intact;
      out->retransmissions = r.retransmissions;
      out->rto_events = r.rto_events;
      out->duplicate_segments = r.duplicate_segments;
      out->bad_checksums = r.bad_checksums;
      out->offload_enabled = sc.offload.enabled;
      out->offloaded = r.offload.offloaded;
      out->offload_ms = r.offload.offload_ms;
      out->proxy_segments_after_offload = r.offload.proxy_segments_after_offload;
      out->goodput_pre_bps = r.offload.goodput_pre_bps;
      out->goodput_post_bps = r.offload.goodput_post_bps;
    }
    copy_text(mosto::format_summary(r), text, text_cap);
    return MOSTO_OK;
  });
}

mosto_status mosto_controller_run(const char* config_path) {
  return guarded([&] {
    MOSTO_REQUIRE(config_path, "null argument");
    mosto::run_controller(mosto::load_controller_config(config_path));
    return MOSTO_OK;
  });
}

}  // extern "C"
