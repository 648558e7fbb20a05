/* Exercises the shared library through its C header only. */
#define _XOPEN_SOURCE 700
#include <ftw.h>
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <unistd.h>

#include <mosto/mosto.h>

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static const char* kUs6 =
    "node 0 sfo\nnode 1 den\nnode 2 chi\nnode 3 nyc\nnode 4 dfw\nnode 5 atl\n"
    "link 0 1 25\nlink 1 2 20\nlink 2 3 18\nlink 0 4 35\nlink 4 5 16\nlink 5 3 17\n"
    "link 1 4 15\nlink 0 3 70\n";

static void write_text(const char* path, const char* text) {
  FILE* f = fopen(path, "w");
  if (!f) {
    perror(path);
    exit(2);
  }
  fputs(text, f);
  fclose(f);
}

static void test_errors(void) {
  mosto_graph* g = NULL;
  CHECK(mosto_version() != NULL && strlen(mosto_version()) > 0);
  CHECK(mosto_graph_parse("node 0\nnode 1\nlink 0 1 -5\n", &g) == MOSTO_ERR_INPUT);
  CHECK(g == NULL);
  CHECK(strstr(mosto_last_error(), "line 3") != NULL);
  CHECK(mosto_graph_parse(NULL, &g) == MOSTO_ERR_ARGUMENT);
  CHECK(mosto_graph_load("/nonexistent/us6.topo", &g) == MOSTO_ERR_IO);
  CHECK(mosto_graph_node_count(NULL) == 0);
  CHECK(isnan(mosto_mesh_get(NULL, 0, 1)));
  mosto_graph_free(NULL);
  mosto_mesh_free(NULL);
  mosto_front_free(NULL);
  mosto_table_free(NULL);
}

static void test_pipeline(const char* dir) {
  mosto_graph* g = NULL;
  mosto_mesh* m = NULL;
  mosto_front *fo = NULL, *fb = NULL;
  mosto_table *t = NULL, *t2 = NULL;
  mosto_front_stats so, sb;
  char path[512];

  CHECK(mosto_graph_parse(kUs6, &g) == MOSTO_OK);
  CHECK(mosto_graph_node_count(g) == 6);
  CHECK(mosto_mesh_build(g, &m) == MOSTO_OK);
  CHECK(mosto_mesh_size(m) == 6);
  CHECK(mosto_mesh_get(m, 0, 3) == 63.0);
  CHECK(mosto_mesh_get(m, 3, 0) == 63.0);
  CHECK(isnan(mosto_mesh_get(m, 0, 6)));

  CHECK(mosto_front_compute(m, MOSTO_ALGO_OPTIMIZED, &fo, &so) == MOSTO_OK);
  CHECK(mosto_front_compute(m, MOSTO_ALGO_BASELINE, &fb, &sb) == MOSTO_OK);
  CHECK(mosto_front_compute(m, (mosto_algorithm)7, &fb, NULL) == MOSTO_ERR_ARGUMENT);
  CHECK(mosto_front_equal(fo, fb));
  CHECK(so.entries == sb.entries);
  CHECK(so.entries == mosto_front_entry_count(fo));
  CHECK(so.pair_checks < sb.pair_checks);
  CHECK(so.iterations == 15);

  /* The shortest 0 -> 3 chain is the last entry and has length 63. */
  {
    size_t k = mosto_front_list_size(fo, 0, 3), hc = 0;
    uint32_t hops[8];
    double len = 0, mx = 0;
    CHECK(k >= 1);
    CHECK(mosto_front_get(fo, 0, 3, k - 1, hops, 8, &hc, &len, &mx) == MOSTO_OK);
    CHECK(len == 63.0);
    CHECK(hops[0] == 0 && hops[hc - 1] == 3);
    CHECK(mosto_front_get(fo, 0, 3, k, hops, 8, &hc, &len, &mx) == MOSTO_ERR_ARGUMENT);
    CHECK(mosto_front_get(fo, 0, 3, k - 1, hops, 1, &hc, &len, &mx) == MOSTO_ERR_ARGUMENT);
  }

  {
    mosto_transfer_model model = mosto_transfer_model_default();
    int r = 0;
    CHECK(model.icw == 10 && model.mss == 1460);
    CHECK(mosto_rounds_for_size(&model, 450000, &r) == MOSTO_OK && r == 5);
    CHECK(mosto_rounds_for_size(&model, 0, &r) == MOSTO_ERR_INPUT);
    model.max_rounds = 0;
    CHECK(mosto_table_build(fo, &model, &t) == MOSTO_ERR_INPUT);
    CHECK(mosto_table_build(fo, NULL, &t) == MOSTO_OK);
  }

  {
    uint32_t hops[8];
    mosto_chain_info info, info2;
    double modeled = 0, simulated = 0;
    CHECK(mosto_table_lookup(t, 0, 3, 14600, hops, 8, &info) == MOSTO_OK);
    CHECK(info.rounds == 1);
    CHECK(info.modeled_ms == 31.5);
    CHECK(mosto_table_lookup(t, 0, 3, 14600, hops, 1, &info) == MOSTO_ERR_ARGUMENT);
    CHECK(info.hop_count >= 2);
    CHECK(mosto_table_lookup(t, 0, 0, 14600, hops, 8, &info) == MOSTO_ERR_INPUT);

    snprintf(path, sizeof path, "%s/table.txt", dir);
    CHECK(mosto_table_save(t, path) == MOSTO_OK);
    CHECK(mosto_table_load(path, &t2) == MOSTO_OK);
    CHECK(mosto_table_lookup(t2, 0, 3, 450000, hops, 8, &info2) == MOSTO_OK);
    CHECK(mosto_table_lookup(t, 0, 3, 450000, hops, 8, &info) == MOSTO_OK);
    CHECK(info.modeled_ms == info2.modeled_ms);
    CHECK(info.hop_count == info2.hop_count);

    CHECK(mosto_chain_time(m, hops, info.hop_count, 450000, NULL, &modeled, &simulated) == MOSTO_OK);
    CHECK(modeled == info.modeled_ms);
    CHECK(fabs(simulated - modeled) < 1e-6);
  }

  {
    int rounds[] = {1, 5, 10};
    char summary[2048];
    char cdf[512];
    snprintf(path, sizeof path, "%s/compare.csv", dir);
    snprintf(cdf, sizeof cdf, "%s/compare.cdf.csv", dir);
    CHECK(mosto_compare_write(fo, rounds, 3, path, cdf, summary, sizeof summary) == MOSTO_OK);
    CHECK(strncmp(summary, "rounds 1: pairs 15", 18) == 0);
    CHECK(access(cdf, R_OK) == 0);
    CHECK(mosto_compare_write(fo, rounds, 3, "/nonexistent/x.csv", cdf, NULL, 0) == MOSTO_ERR_IO);
  }

  snprintf(path, sizeof path, "%s/mesh.csv", dir);
  CHECK(mosto_mesh_save_csv(m, path) == MOSTO_OK);
  {
    mosto_mesh* back = NULL;
    CHECK(mosto_mesh_load_csv(path, &back) == MOSTO_OK);
    CHECK(mosto_mesh_get(back, 2, 4) == 35.0);
    mosto_mesh_free(back);
  }

  mosto_table_free(t2);
  mosto_table_free(t);
  mosto_front_free(fb);
  mosto_front_free(fo);
  mosto_mesh_free(m);
  mosto_graph_free(g);
}

static void test_simulation(const char* dir) {
  char path[512];
  char text[4096];
  mosto_sim_summary s;
  uint64_t seed = 3;

  snprintf(path, sizeof path, "%s/direct.scn", dir);
  write_text(path, "rtt_ms = 90\nsize = 450000\n");
  CHECK(mosto_simulate_file(path, NULL, NULL, &s, text, sizeof text) == MOSTO_OK);
  CHECK(s.completed && s.stream_intact);
  CHECK(fabs(s.completion_ms - 405.0) < 1e-6);
  CHECK(!s.offload_enabled);
  CHECK(strstr(text, "completion_ms: 405.000") != NULL);

  snprintf(path, sizeof path, "%s/budget.scn", dir);
  write_text(path, "rtt_ms = 50\nsize = 50000000\nmax_events = 500\n");
  CHECK(mosto_simulate_file(path, &seed, NULL, &s, NULL, 0) == MOSTO_ERR_DIVERGED);

  snprintf(path, sizeof path, "%s/bad.scn", dir);
  write_text(path, "rtt_ms = 50\n");
  CHECK(mosto_simulate_file(path, NULL, NULL, &s, NULL, 0) == MOSTO_ERR_INPUT);

  {
    char trace[512];
    snprintf(path, sizeof path, "%s/offload.scn", dir);
    snprintf(trace, sizeof trace, "%s/offload-trace.csv", dir);
    write_text(path,
               "mode = offload\nrtt_ms = 50, 50\nbandwidth_mbps = inf, 10\nsize = 10000000\n"
               "recv_buffer = 163840\nproxy_buffer = 262144\nrto_min_ms = 30\nclock_granularity_ms = 20\n");
    CHECK(mosto_simulate_file(path, &seed, trace, &s, NULL, 0) == MOSTO_OK);
    CHECK(s.offload_enabled && s.offloaded);
    CHECK(s.retransmissions == 0);
    CHECK(s.proxy_segments_after_offload == 0);
    CHECK(access(trace, R_OK) == 0);
  }
}

static void test_controller(const char* dir) {
  char path[512], conf[1024], out[512];
  mosto_table* t = NULL;
  mosto_chain_info info;
  uint32_t hops[8];

  snprintf(path, sizeof path, "%s/us6.topo", dir);
  write_text(path, kUs6);
  snprintf(path, sizeof path, "%s/updates.txt", dir);
  write_text(path, "rtt 0 3 50\n");
  snprintf(out, sizeof out, "%s/tables", dir);
  snprintf(conf, sizeof conf, "topology = us6.topo\ninput = updates.txt\noutput_dir = tables\nperiod_ms = 60000\n");
  snprintf(path, sizeof path, "%s/ctl.conf", dir);
  write_text(path, conf);
  CHECK(mosto_controller_run(path) == MOSTO_OK);
  CHECK(mosto_table_load(out, &t) == MOSTO_OK);
  CHECK(mosto_table_lookup(t, 0, 3, 1000, hops, 8, &info) == MOSTO_OK);
  CHECK(info.generation == 2);
  CHECK(info.hop_count == 2 && info.modeled_ms == 25.0);
  mosto_table_free(t);

  snprintf(path, sizeof path, "%s/broken.conf", dir);
  write_text(path, "input = x\n");
  CHECK(mosto_controller_run(path) == MOSTO_ERR_INPUT);
}

static int remove_entry(const char* path, const struct stat* sb, int flag, struct FTW* ftw) {
  (void)sb;
  (void)flag;
  (void)ftw;
  return remove(path);
}

int main(int argc, char** argv) {
  char dir[] = "/tmp/mosto-capi-XXXXXX";
  (void)argc;
  (void)argv;
  if (!mkdtemp(dir)) {
    perror("mkdtemp");
    return 2;
  }
  test_errors();
  test_pipeline(dir);
  test_simulation(dir);
  test_controller(dir);
  if (failures) {
    fprintf(stderr, "%d check(s) failed; scratch files in %s\n", failures, dir);
    return 1;
  }
  nftw(dir, remove_entry, 16, FTW_DEPTH | FTW_PHYS);
  printf("capi: all checks passed\n");
  return 0;
}
