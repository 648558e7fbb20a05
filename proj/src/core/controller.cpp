#include "controller.hpp"

#include <chrono>
#include <condition_variable>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <fmt/format.h>

#include "error.hpp"
#include "pareto.hpp"
#include "text.hpp"

namespace mosto {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, std::string_view p) {
  if (p == "-" || p.empty()) return std::string(p);
  fs::path path{std::string(p)};
  return path.is_absolute() ? path.string() : (fs::path(base) / path).string();
}

template <typename Int>
Int int_value(std::string_view v, std::string_view key, int line) {
  Int out{};
  if (!parse_int(v, out)) throw InputError(fmt::format("{}: expected an integer, got '{}'", key, v), line);
  return out;
}

}  // namespace

ControllerConfig parse_controller_config(std::string_view text, const std::string& base_dir) {
  ControllerConfig cfg;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(fmt::format("expected key = value, got '{}'", line), line_no);
    const auto key = trim(line.substr(0, eq));
    const auto v = trim(line.substr(eq + 1));
    double x = 0;
    if (key == "topology") {
      cfg.topology_path = resolve(base_dir, v);
    } else if (key == "matrix") {
      cfg.matrix_path = resolve(base_dir, v);
    } else if (key == "input") {
      cfg.input_path = resolve(base_dir, v);
    } else if (key == "output_dir") {
      cfg.output_dir = resolve(base_dir, v);
    } else if (key == "period_ms") {
      cfg.period = parse_rtt_ms(v, line_no);
    } else if (key == "threshold") {
      if (!parse_double(v, x) || !(x >= 0) || !std::isfinite(x))
        throw InputError("threshold must be a non-negative number", line_no);
      cfg.threshold = x;
    } else if (key == "floor_ms") {
      if (!parse_double(v, x) || !(x >= 0) || !std::isfinite(x))
        throw InputError("floor_ms must be a non-negative number", line_no);
      cfg.floor = Delay::from_ms(x);
    } else if (key == "dirty_trigger") {
      cfg.dirty_trigger = int_value<std::size_t>(v, key, line_no);
    } else if (key == "steer") {
      const auto parts = split(v, ':');
      if (parts.size() != 2) throw InputError("steer expects <edge>:<lop>", line_no);
      const auto edge = int_value<NodeId>(trim(parts[0]), key, line_no);
      const auto lop = int_value<NodeId>(trim(parts[1]), key, line_no);
      if (!cfg.steer.emplace(edge, lop).second) throw InputError(fmt::format("edge {} steered twice", edge), line_no);
    } else if (key == "icw") {
      cfg.model.icw = int_value<int>(v, key, line_no);
    } else if (key == "mss") {
      cfg.model.mss = int_value<int>(v, key, line_no);
    } else if (key == "max_rounds") {
      cfg.model.max_rounds = int_value<int>(v, key, line_no);
    } else if (key == "max_generations") {
      cfg.max_generations = int_value<std::uint64_t>(v, key, line_no);
    } else {
      throw InputError(fmt::format("unknown key '{}'", key), line_no);
    }
  }
  cfg.model.validate();
  if (cfg.topology_path.empty() == cfg.matrix_path.empty())
    throw InputError("config needs exactly one of topology or matrix");
  return cfg;
}

ControllerConfig load_controller_config(const std::string& path) {
  const auto dir = fs::path(path).parent_path();
  return parse_controller_config(read_file(path), dir.empty() ? "." : dir.string());
}

Controller::Controller(DistanceMatrix d, ControllerConfig cfg) : cfg_(std::move(cfg)), d_(std::move(d)) {
  cfg_.model.validate();
  d_.validate();
  const std::size_t n = d_.size();
  if (n < 2) throw InputError("controller needs at least two locations");
  for (const auto& [edge, lop] : cfg_.steer) {
    if (edge >= n || lop >= n) throw InputError(fmt::format("steering {}:{} names an unknown location", edge, lop));
    if (edge == lop) throw InputError(fmt::format("location {} steered to itself", edge));
    if (cfg_.steer.count(lop)) throw InputError(fmt::format("location {} is steered and also a steering target", lop));
  }
  for (NodeId v = 0; v < n; ++v)
    if (!cfg_.steer.count(v)) front_nodes_.push_back(v);
  if (cfg_.dirty_trigger == 0) cfg_.dirty_trigger = n;
}

bool Controller::apply_update(NodeId i, NodeId j, Delay rtt) {
  std::lock_guard lock(state_mu_);
  const std::size_t n = d_.size();
  if (i >= n || j >= n) throw InputError(fmt::format("update {}-{} names an unknown location", i, j));
  if (i == j) throw InputError(fmt::format("update {}-{} is a self pair", i, j));
  if (rtt <= Delay::zero() || rtt.is_infinite()) throw InputError("update RTT must be positive and finite");
  const Delay old = d_.at(i, j);
  const Delay change = rtt > old ? rtt - old : old - rtt;
  const auto relative = Delay::from_picos(static_cast<std::int64_t>(std::llround(cfg_.threshold * static_cast<double>(old.picos()))));
  if (change <= std::max(relative, cfg_.floor)) return false;
  d_.set(i, j, rtt);
  dirty_.emplace(std::min(i, j), std::max(i, j));
  return true;
}

std::size_t Controller::dirty_pairs() const {
  std::lock_guard lock(state_mu_);
  return dirty_.size();
}

DistanceMatrix Controller::matrix() const {
  std::lock_guard lock(state_mu_);
  return d_;
}

std::shared_ptr<const Snapshot> Controller::current() const {
  std::lock_guard lock(snap_mu_);
  return snapshot_;
}

std::shared_ptr<const Snapshot> Controller::recompute_cycle() {
  DistanceMatrix d;
  {
    std::lock_guard lock(state_mu_);
    d = d_;
    dirty_.clear();
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::map<NodeId, Steering> steering;
  for (const auto& [edge, lop] : cfg_.steer) steering.emplace(edge, Steering{lop, d.at(edge, lop)});
  const ParetoFront front = pareto_optimized(d.submatrix(front_nodes_));
  auto snap = std::make_shared<Snapshot>();
  snap->table = build_lookup_table(front, cfg_.model, front_nodes_, d.size(), steering);
  snap->matrix = std::move(d);
  snap->compute_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  snap->generation = ++generation_;
  snap->table.set_generation(snap->generation);
  if (snap->compute_ms > cfg_.period.ms())
    fmt::print(stderr, "controller: generation {} took {:.1f} ms, over the {} ms period\n", snap->generation,
               snap->compute_ms, cfg_.period.ms());
  publish(snap);
  return snap;
}

void Controller::publish(std::shared_ptr<const Snapshot> s) {
  if (!cfg_.output_dir.empty()) {
    fs::create_directories(cfg_.output_dir);
    const std::string name = fmt::format("table-{}.txt", s->generation);
    s->table.save((fs::path(cfg_.output_dir) / name).string());
    const auto tmp = fs::path(cfg_.output_dir) / "current.tmp";
    {
      std::ofstream out(tmp);
      out << name << '\n';
      if (!out) throw IoError("cannot write " + tmp.string());
    }
    fs::rename(tmp, fs::path(cfg_.output_dir) / "current");
  }
  std::lock_guard lock(snap_mu_);
  snapshot_ = std::move(s);
}

RttReport parse_rtt_report(std::string_view line, int line_no) {
  const auto tok = tokenize(trim(strip_comment(line)));
  if (tok.size() != 4 || tok[0] != "rtt") throw InputError("expected 'rtt <i> <j> <ms>'", line_no);
  RttReport r{};
  if (!parse_int(tok[1], r.i) || !parse_int(tok[2], r.j)) throw InputError("expected node indices", line_no);
  r.rtt = parse_rtt_ms(tok[3], line_no);
  return r;
}

bool Controller::run(std::istream& in) {
  struct Shared {
    std::mutex mu;
    std::condition_variable cv;
    bool eof = false;
    bool stop = false;
  };
  auto sh = std::make_shared<Shared>();

  recompute_cycle();
  if (cfg_.max_generations != 0 && generation_ >= cfg_.max_generations) return true;

  std::thread reader([this, sh, &in] {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(strip_comment(line)).empty()) continue;
      std::lock_guard lock(sh->mu);
      if (sh->stop) return;
      try {
        const RttReport r = parse_rtt_report(line, line_no);
        if (apply_update(r.i, r.j, r.rtt) && dirty_pairs() >= cfg_.dirty_trigger) sh->cv.notify_one();
      } catch (const InputError& e) {
        fmt::print(stderr, "controller: ignoring report: {}\n", e.what());
      }
    }
    std::lock_guard lock(sh->mu);
    sh->eof = true;
    sh->cv.notify_one();
  });

  const auto period = std::chrono::nanoseconds(cfg_.period.picos() / 1000);
  auto next = std::chrono::steady_clock::now() + period;
  bool finished = false;
  for (;;) {
    {
      std::unique_lock lock(sh->mu);
      sh->cv.wait_until(lock, next, [&] { return sh->eof || dirty_pairs() >= cfg_.dirty_trigger; });
      finished = sh->eof;
    }
    if (finished && dirty_pairs() == 0) break;
    if (std::chrono::steady_clock::now() >= next || dirty_pairs() > 0) {
      recompute_cycle();
      next = std::chrono::steady_clock::now() + period;
    }
    if (finished) break;
    if (cfg_.max_generations != 0 && generation_ >= cfg_.max_generations) break;
  }
  {
    std::lock_guard lock(sh->mu);
    sh->stop = true;
    finished = sh->eof;
  }
  // A reader blocked on a FIFO or terminal cannot be interrupted portably.
  if (finished)
    reader.join();
  else
    reader.detach();
  return finished;
}

int run_controller(const ControllerConfig& cfg) {
  DistanceMatrix d = cfg.matrix_path.empty() ? build_full_mesh(ProxyGraph::load(cfg.topology_path))
                                             : DistanceMatrix::load_csv(cfg.matrix_path);
  Controller c(std::move(d), cfg);
  if (cfg.input_path == "-") {
    c.run(std::cin);
  } else {
    auto in = std::make_unique<std::ifstream>(cfg.input_path);
    if (!*in) throw IoError("cannot open " + cfg.input_path);
    // A detached reader still holds the stream, so it must stay alive.
    if (!c.run(*in)) in.release();
  }
  if (auto s = c.current())
    fmt::print(stderr, "controller: stopped at generation {}\n", s->generation);
  return 0;
}

}  // namespace mosto
