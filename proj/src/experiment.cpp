#include "hnsim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Core>

#include "hnsim/entanglement.hpp"
#include "hnsim/freefermion.hpp"
#include "hnsim/kernels.hpp"
#include "hnsim/observables.hpp"
#include "hnsim/rng.hpp"
#include "hnsim/spectral.hpp"
#include "hnsim/theory.hpp"

namespace hnsim {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void get(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::uint64_t get_seed(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

std::vector<double> TimeGrid::build() const {
  std::vector<double> t;
  if (kind == "list") {
    t = values;
  } else if (kind == "log") {
    t = log_time_grid(t_min, t_max, n);
  } else if (kind == "linear") {
    if (n < 2 || !(t_max > t_min) || t_min < 0.0) throw ConfigError("times: invalid linear grid");
    for (int i = 0; i < n; ++i) t.push_back(t_min + (t_max - t_min) * i / (n - 1));
  } else {
    throw ConfigError("times.kind must be log, linear or list");
  }
  if (include_zero && (t.empty() || t.front() > 0.0)) t.insert(t.begin(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConfigError("times: must be strictly increasing");
  if (!t.empty() && t.front() < 0.0) throw ConfigError("times: must be non-negative");
  return t;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  check_keys(j, "config", {"model", "run", "ensemble", "observables", "sweep", "scan",
                           "single_particle", "qpp", "fit", "output", "threads"});
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, "model", {"L", "N", "gamma0", "g", "V", "W", "alpha", "theta", "boundary", "alpha_fibonacci"});
    get(m, "L", c.model.L, "model");
    c.model.N = c.model.L / 2;
    get(m, "N", c.model.N, "model");
    get(m, "gamma0", c.model.gamma0, "model");
    get(m, "g", c.model.g, "model");
    get(m, "V", c.model.V, "model");
    get(m, "W", c.model.W, "model");
    get(m, "alpha", c.model.alpha, "model");
    if (m.contains("alpha_fibonacci")) {
      if (m.contains("alpha")) throw ConfigError("model: give alpha or alpha_fibonacci, not both");
      int n = 0;
      get(m, "alpha_fibonacci", n, "model");
      c.model.alpha = fibonacci_alpha(n);
    }
    get(m, "theta", c.model.theta, "model");
    if (m.contains("boundary")) {
      try {
        c.model.boundary = parse_boundary(m["boundary"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("model.boundary: ") + e.what());
      }
    }
  }
  if (j.contains("run")) {
    const auto& r = j["run"];
    check_keys(r, "run", {"dt", "M", "times", "initial_state"});
    get(r, "dt", c.run.dt, "run");
    get(r, "M", c.run.M, "run");
    get(r, "initial_state", c.run.initial_state, "run");
    if (r.contains("times")) {
      const auto& t = r["times"];
      check_keys(t, "run.times", {"kind", "t_min", "t_max", "n", "include_zero", "values"});
      get(t, "kind", c.run.times.kind, "run.times");
      get(t, "t_min", c.run.times.t_min, "run.times");
      get(t, "t_max", c.run.times.t_max, "run.times");
      get(t, "n", c.run.times.n, "run.times");
      get(t, "include_zero", c.run.times.include_zero, "run.times");
      get(t, "values", c.run.times.values, "run.times");
    }
  }
  if (j.contains("ensemble")) {
    const auto& e = j["ensemble"];
    check_keys(e, "ensemble", {"n_samples", "base_seed", "theta_mode", "thetas"});
    get(e, "n_samples", c.ensemble.n_samples, "ensemble");
    c.ensemble.base_seed = get_seed(e, "base_seed", c.ensemble.base_seed, "ensemble");
    get(e, "theta_mode", c.ensemble.theta_mode, "ensemble");
    get(e, "thetas", c.ensemble.thetas, "ensemble");
  }
  if (j.contains("observables")) {
    const auto& o = j["observables"];
    check_keys(o, "observables", {"nj", "nk", "corr", "ells"});
    get(o, "nj", c.observables.nj, "observables");
    get(o, "nk", c.observables.nk, "observables");
    get(o, "corr", c.observables.corr, "observables");
    get(o, "ells", c.observables.ells, "observables");
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    check_keys(s, "sweep", {"W", "L", "threshold"});
    get(s, "W", c.sweep.W, "sweep");
    get(s, "L", c.sweep.L, "sweep");
    get(s, "threshold", c.sweep.threshold, "sweep");
  }
  if (j.contains("scan")) {
    const auto& s = j["scan"];
    check_keys(s, "scan", {"method", "ells", "keep_edges"});
    get(s, "method", c.scan.method, "scan");
    get(s, "ells", c.scan.ells, "scan");
    get(s, "keep_edges", c.scan.keep_edges, "scan");
  }
  if (j.contains("single_particle")) {
    const auto& s = j["single_particle"];
    check_keys(s, "single_particle", {"j0", "W", "fit_t_min"});
    get(s, "j0", c.single_particle.j0, "single_particle");
    get(s, "W", c.single_particle.W, "single_particle");
    get(s, "fit_t_min", c.single_particle.fit_t_min, "single_particle");
  }
  if (j.contains("qpp")) {
    const auto& q = j["qpp"];
    check_keys(q, "qpp", {"ells", "time_dependent_weights", "factor2"});
    get(q, "ells", c.qpp.ells, "qpp");
    get(q, "time_dependent_weights", c.qpp.time_dependent_weights, "qpp");
    get(q, "factor2", c.qpp.factor2, "qpp");
  }
  if (j.contains("fit")) {
    const auto& f = j["fit"];
    check_keys(f, "fit", {"kind", "input", "m", "keep_edges"});
    get(f, "kind", c.fit.kind, "fit");
    get(f, "input", c.fit.input, "fit");
    get(f, "m", c.fit.m, "fit");
    get(f, "keep_edges", c.fit.keep_edges, "fit");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    check_keys(o, "output", {"dir"});
    get(o, "dir", c.output_dir, "output");
  }
  get(j, "threads", c.threads, "config");

  // Value checks that do not need the Hamiltonian.
  if (c.model.L < 2) throw ConfigError("model.L must be at least 2");
  if (c.model.N < 0 || c.model.N > c.model.L) throw ConfigError("model.N outside [0, L]");
  if (!(c.run.dt > 0.0)) throw ConfigError("run.dt must be positive");
  if (c.run.M < 1) throw ConfigError("run.M must be at least 1");
  if (c.run.initial_state != "density_wave" && c.run.initial_state != "mixed_filling")
    throw ConfigError("run.initial_state must be density_wave or mixed_filling");
  if (c.ensemble.n_samples < 1) throw ConfigError("ensemble.n_samples must be at least 1");
  if (c.ensemble.theta_mode != "sampled" && c.ensemble.theta_mode != "explicit")
    throw ConfigError("ensemble.theta_mode must be sampled or explicit");
  if (c.ensemble.theta_mode == "explicit" &&
      static_cast<int>(c.ensemble.thetas.size()) < c.ensemble.n_samples)
    throw ConfigError("ensemble.thetas must list at least n_samples values");
  if (c.scan.method != "krylov" && c.scan.method != "freefermion")
    throw ConfigError("scan.method must be krylov or freefermion");
  if (c.fit.kind != "ceff" && c.fit.kind != "relaxation")
    throw ConfigError("fit.kind must be ceff or relaxation");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"L", c.model.L},         {"N", c.model.N},         {"gamma0", c.model.gamma0},
                {"g", c.model.g},         {"V", c.model.V},         {"W", c.model.W},
                {"alpha", c.model.alpha}, {"theta", c.model.theta}, {"boundary", to_string(c.model.boundary)}};
  j["run"] = {{"dt", c.run.dt},
              {"M", c.run.M},
              {"initial_state", c.run.initial_state},
              {"times",
               {{"kind", c.run.times.kind},
                {"t_min", c.run.times.t_min},
                {"t_max", c.run.times.t_max},
                {"n", c.run.times.n},
                {"include_zero", c.run.times.include_zero},
                {"values", c.run.times.values}}}};
  j["ensemble"] = {{"n_samples", c.ensemble.n_samples},
                   {"base_seed", c.ensemble.base_seed},
                   {"theta_mode", c.ensemble.theta_mode},
                   {"thetas", c.ensemble.thetas}};
  j["observables"] = {{"nj", c.observables.nj},
                      {"nk", c.observables.nk},
                      {"corr", c.observables.corr},
                      {"ells", c.observables.ells}};
  j["sweep"] = {{"W", c.sweep.W}, {"L", c.sweep.L}, {"threshold", c.sweep.threshold}};
  j["scan"] = {{"method", c.scan.method}, {"ells", c.scan.ells}, {"keep_edges", c.scan.keep_edges}};
  j["single_particle"] = {{"j0", c.single_particle.j0},
                          {"W", c.single_particle.W},
                          {"fit_t_min", c.single_particle.fit_t_min}};
  j["qpp"] = {{"ells", c.qpp.ells},
              {"time_dependent_weights", c.qpp.time_dependent_weights},
              {"factor2", c.qpp.factor2}};
  j["fit"] = {{"kind", c.fit.kind}, {"input", c.fit.input}, {"m", c.fit.m}, {"keep_edges", c.fit.keep_edges}};
  j["output"] = {{"dir", c.output_dir}};
  j["threads"] = c.threads;
  return j;
}

std::uint64_t sample_seed(const EnsembleConfig& e, int index) {
  return e.base_seed + static_cast<std::uint64_t>(index);
}

double sample_theta(const EnsembleConfig& e, int index) {
  if (e.theta_mode == "explicit") return e.thetas.at(static_cast<std::size_t>(index));
  Rng rng(sample_seed(e, index));
  return 2.0 * kPi * rng.uniform01();
}

// ---------------------------------------------------------------- CSV

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    if (s == "nan") return std::nan("");
    throw ConfigError(path + ": malformed number '" + s + "'");
  }
}

const char* kLongHeader = "sample,t,key,index,value";
const char* kAveragedHeader = "t,key,index,mean,stderr,n";

}  // namespace

void write_long_csv(const std::string& path, const std::vector<LongRow>& rows) {
  auto out = open_out(path);
  out << kLongHeader << '\n';
  for (const auto& r : rows)
    out << r.sample << ',' << fmt(r.t) << ',' << r.key << ',' << r.index << ',' << fmt(r.value) << '\n';
}

void write_averaged_csv(const std::string& path, const std::vector<AveragedRow>& rows) {
  auto out = open_out(path);
  out << kAveragedHeader << '\n';
  for (const auto& r : rows)
    out << fmt(r.t) << ',' << r.key << ',' << r.index << ',' << fmt(r.mean) << ',' << fmt(r.stderr_)
        << ',' << r.n << '\n';
}

std::vector<LongRow> read_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kLongHeader)
    throw ConfigError(path + ": expected header '" + kLongHeader + "'");
  std::vector<LongRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw ConfigError(path + ": row with " + std::to_string(f.size()) + " fields");
    rows.push_back({static_cast<int>(to_double(f[0], path)), to_double(f[1], path), f[2],
                    static_cast<int>(to_double(f[3], path)), to_double(f[4], path)});
  }
  return rows;
}

std::vector<AveragedRow> read_averaged_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kAveragedHeader)
    throw ConfigError(path + ": expected header '" + kAveragedHeader + "'");
  std::vector<AveragedRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw ConfigError(path + ": row with " + std::to_string(f.size()) + " fields");
    rows.push_back({to_double(f[0], path), f[1], static_cast<int>(to_double(f[2], path)),
                    to_double(f[3], path), to_double(f[4], path), static_cast<int>(to_double(f[5], path))});
  }
  return rows;
}

std::vector<AveragedRow> average_rows(const std::vector<LongRow>& rows) {
  std::map<std::tuple<std::string, double, int>, std::vector<double>> cells;
  for (const auto& r : rows) cells[{r.key, r.t, r.index}].push_back(r.value);
  std::vector<AveragedRow> out;
  out.reserve(cells.size());
  for (const auto& [k, v] : cells) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const auto n = static_cast<double>(v.size());
    const double se = v.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    out.push_back({std::get<1>(k), std::get<0>(k), std::get<2>(k), mean, se, static_cast<int>(v.size())});
  }
  return out;
}

std::vector<AveragedRow> average_files(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("average: no input files");
  std::vector<LongRow> all;
  int member = 0;
  for (const auto& p : paths) {
    auto rows = read_long_csv(p);
    // Re-label so that (file, sample) pairs stay distinct members.
    std::map<int, int> relabel;
    for (auto& r : rows) {
      auto [it, inserted] = relabel.emplace(r.sample, member);
      if (inserted) ++member;
      r.sample = it->second;
    }
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return average_rows(all);
}

// ---------------------------------------------------------------- runners

namespace {

// Runs body(i) for i in [0, n) on the OpenMP pool; the first exception is
// rethrown after the loop.
template <class F>
void parallel_tasks(int n, F&& body) {
  std::exception_ptr error;
  std::mutex m;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

struct SampleInfo {
  int index;
  std::uint64_t seed;
  double theta;
};

std::vector<SampleInfo> samples_of(const EnsembleConfig& e) {
  std::vector<SampleInfo> s;
  for (int i = 0; i < e.n_samples; ++i) s.push_back({i, sample_seed(e, i), sample_theta(e, i)});
  return s;
}

void check_capacity(int L, bool full) {
  if (L > kMaxSites)
    throw CapacityError("L=" + std::to_string(L) + " exceeds the supported maximum " + std::to_string(kMaxSites));
  if (full && L > 14) throw CapacityError("mixed_filling runs are limited to L <= 14");
}

json samples_json(const std::vector<SampleInfo>& s) {
  json a = json::array();
  for (const auto& x : s) a.push_back({{"index", x.index}, {"seed", x.seed}, {"theta", x.theta}});
  return a;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_manifest(const std::string& dir, const std::string& command, const ExperimentConfig& cfg,
                    const json& samples, const std::vector<std::string>& files, double wall) {
  json m;
  m["command"] = command;
  m["config"] = to_json(cfg);
  m["versions"] = {{"hnsim", "0.1.0"},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                 "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  m["threads"] = kernels::max_threads();
  m["wall_seconds"] = wall;
  m["samples"] = samples;
  m["files"] = files;
  auto out = open_out(join(dir, "manifest.json"));
  out << m.dump(2) << '\n';
}

TrajectoryRecord run_one_trajectory(const ExperimentConfig& cfg, const SampleInfo& s,
                                    const std::vector<double>& times, const RecordSpec& spec) {
  ModelParams p = cfg.model;
  p.theta = s.theta;
  const bool full = cfg.run.initial_state == "mixed_filling";
  check_capacity(p.L, full);
  BasisPtr basis = full ? std::make_shared<const FockBasis>(FockBasis::full(p.L))
                        : std::make_shared<const FockBasis>(FockBasis::sector(p.L, p.N));
  const SparseHamiltonian h(p, basis);
  // The mixed-filling draw uses its own stream so it does not share draws with theta.
  const ManyBodyVector psi0 =
      full ? prepare_mixed_filling(p.L, s.seed ^ 0x9E3779B97F4A7C15ull) : prepare_density_wave(basis);
  KrylovConfig kc;
  kc.dt = cfg.run.dt;
  kc.M = cfg.run.M;
  RecordSpec rs = spec;
  rs.times = times;
  TrajectoryRecord rec = evolve_trajectory(h, psi0, kc, rs);
  rec.sample = {s.index, s.seed, s.theta};
  return rec;
}

std::vector<std::string> cmd_evolve(const ExperimentConfig& cfg, const std::string& dir, json& samples_out) {
  const auto samples = samples_of(cfg.ensemble);
  samples_out = samples_json(samples);
  const auto recs = run_evolve_samples(cfg);
  std::vector<LongRow> nj, nk, sent, corr;
  std::vector<std::string> files;
  fs::create_directories(join(dir, "samples"));
  for (const auto& r : recs) {
    std::vector<LongRow> mine;
    const int s = r.sample.index;
    for (Eigen::Index i = 0; i < r.times.size(); ++i) {
      const double t = r.times[i];
      if (!r.nj.empty())
        for (Eigen::Index j = 0; j < r.nj[i].size(); ++j) nj.push_back({s, t, "nj", static_cast<int>(j), r.nj[i][j]});
      if (!r.nk.empty())
        for (Eigen::Index j = 0; j < r.nk[i].size(); ++j) nk.push_back({s, t, "nk", static_cast<int>(j), r.nk[i][j]});
      for (std::size_t c = 0; c < r.ells.size(); ++c)
        sent.push_back({s, t, "S", r.ells[c], r.sent(i, static_cast<Eigen::Index>(c))});
      if (!r.corr.empty())
        for (Eigen::Index j = 0; j < r.corr[i].size(); ++j)
          corr.push_back({s, t, "C", static_cast<int>(j + 1), r.corr[i][j]});
    }
    for (const auto* v : {&nj, &nk, &sent, &corr})
      for (const auto& row : *v)
        if (row.sample == s) mine.push_back(row);
    char name[32];
    std::snprintf(name, sizeof name, "sample_%04d.csv", s);
    write_long_csv(join(join(dir, "samples"), name), mine);
    files.push_back(std::string("samples/") + name);
  }
  const auto emit = [&](const char* name, const std::vector<LongRow>& rows) {
    if (rows.empty()) return;
    write_averaged_csv(join(dir, name), average_rows(rows));
    files.push_back(name);
  };
  emit("nj.csv", nj);
  emit("nk.csv", nk);
  emit("sent.csv", sent);
  emit("corr.csv", corr);

  if (!cfg.observables.ells.empty()) {
    // Per-sample summaries of S(t) for every recorded cut.
    std::vector<LongRow> summary;
    for (const auto& r : recs) {
      for (int ell : r.ells) {
        const auto c = entanglement_scan(r, ell);
        const double tl = r.times[r.times.size() - 1];
        summary.push_back({r.sample.index, tl, "S_max", ell, c.s_max});
        summary.push_back({r.sample.index, tl, "t0", ell, c.t0});
        summary.push_back({r.sample.index, tl, "S_inf", ell, c.s_inf});
        summary.push_back({r.sample.index, tl, "S_inf_std", ell, c.s_inf_std});
      }
    }
    write_long_csv(join(dir, "sent_summary.csv"), summary);
    files.push_back("sent_summary.csv");
  }
  return files;
}

std::vector<std::string> cmd_spectrum(const ExperimentConfig& cfg, const std::string& dir, json& samples_out) {
  const auto samples = samples_of(cfg.ensemble);
  samples_out = samples_json(samples);
  std::vector<int> Ls = cfg.sweep.L.empty() ? std::vector<int>{cfg.model.L} : cfg.sweep.L;
  std::vector<double> Ws = cfg.sweep.W.empty() ? std::vector<double>{cfg.model.W} : cfg.sweep.W;
  for (int L : Ls) check_capacity(L, false);
  struct Task {
    int L;
    double W;
    SampleInfo s;
    double f_im = 0, top = 0, tilde = 0;
  };
  std::vector<Task> tasks;
  for (int L : Ls)
    for (double W : Ws)
      for (const auto& s : samples) tasks.push_back({L, W, s});
  parallel_tasks(static_cast<int>(tasks.size()), [&](int i) {
    Task& t = tasks[static_cast<std::size_t>(i)];
    ModelParams p = cfg.model;
    p.L = t.L;
    p.N = cfg.sweep.L.empty() ? cfg.model.N : t.L / 2;
    p.W = t.W;
    p.theta = t.s.theta;
    const SparseHamiltonian h(p, std::make_shared<const FockBasis>(FockBasis::sector(p.L, p.N)));
    const CVec ev = spectrum_values(h);
    t.f_im = imag_fraction(ev, cfg.sweep.threshold);
    const auto st = imag_gap_stats(ev);
    t.top = st.top;
    t.tilde = st.tilde;
  });

  std::vector<std::string> files;
  {
    auto out = open_out(join(dir, "spectrum_samples.csv"));
    out << "W,L,sample,theta,f_im,E_top,E_tilde\n";
    for (const auto& t : tasks)
      out << fmt(t.W) << ',' << t.L << ',' << t.s.index << ',' << fmt(t.s.theta) << ',' << fmt(t.f_im) << ','
          << fmt(t.top) << ',' << fmt(t.tilde) << '\n';
    files.push_back("spectrum_samples.csv");
  }
  auto out = open_out(join(dir, "fim.csv"));
  out << "W,L,f_im_mean,f_im_err,E_top_mean,E_tilde_mean\n";
  for (double W : Ws) {
    for (int L : Ls) {
      std::vector<const Task*> sel;
      for (const auto& t : tasks)
        if (t.L == L && t.W == W) sel.push_back(&t);
      const double n = static_cast<double>(sel.size());
      double f = 0, top = 0, tilde = 0;
      for (const auto* t : sel) {
        f += t->f_im;
        top += t->top;
        tilde += t->tilde;
      }
      f /= n;
      double var = 0;
      for (const auto* t : sel) var += (t->f_im - f) * (t->f_im - f);
      const double err = sel.size() > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
      out << fmt(W) << ',' << L << ',' << fmt(f) << ',' << fmt(err) << ',' << fmt(top / n) << ','
          << fmt(tilde / n) << '\n';
    }
  }
  files.push_back("fim.csv");
  return files;
}

std::vector<std::string> cmd_scan(const ExperimentConfig& cfg, const std::string& dir, json& samples_out) {
  const auto samples = samples_of(cfg.ensemble);
  samples_out = samples_json(samples);
  const int L = cfg.model.L;
  check_capacity(L, false);
  std::vector<int> ells = cfg.scan.ells;
  if (ells.empty())
    for (int l = 1; l < L; ++l) ells.push_back(l);
  const auto times = cfg.run.times.build();
  if (cfg.scan.method == "freefermion") {
    if (cfg.model.V != 0.0) throw ConfigError("scan.method freefermion requires V = 0");
    if (cfg.model.N != L / 2 || L % 2) throw ConfigError("scan.method freefermion starts from the half-filled density wave");
  }

  std::vector<std::vector<LongRow>> per(samples.size());
  parallel_tasks(static_cast<int>(samples.size()), [&](int i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    RMat sent(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(ells.size()));
    if (cfg.scan.method == "krylov") {
      RecordSpec rs;
      rs.nj = rs.nk = rs.corr = false;
      rs.ells = ells;
      sent = run_one_trajectory(cfg, s, times, rs).sent;
    } else {
      ModelParams p = cfg.model;
      p.theta = s.theta;
      const CMat h1 = single_particle_hamiltonian(p);
      OrbitalSet phi = density_wave_orbitals(L);
      double t_prev = 0.0;
      for (std::size_t r = 0; r < times.size(); ++r) {
        phi = evolve_orbitals(h1, phi, times[r] - t_prev);
        t_prev = times[r];
        const CMat c = correlation_matrix(phi);
        for (std::size_t e = 0; e < ells.size(); ++e)
          sent(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e)) =
              ff_entropy(c.topLeftCorner(ells[e], ells[e]));
      }
    }
    const RVec tv = Eigen::Map<const RVec>(times.data(), static_cast<Eigen::Index>(times.size()));
    auto& rows = per[static_cast<std::size_t>(i)];
    for (std::size_t e = 0; e < ells.size(); ++e) {
      for (Eigen::Index r = 0; r < tv.size(); ++r)
        rows.push_back({s.index, tv[r], "S", ells[e], sent(r, static_cast<Eigen::Index>(e))});
      const auto c = summarize_entanglement(tv, sent.col(static_cast<Eigen::Index>(e)), ells[e]);
      rows.push_back({s.index, tv[tv.size() - 1], "S_inf", ells[e], c.s_inf});
    }
  });
  std::vector<LongRow> curves, sinf;
  for (const auto& rows : per)
    for (const auto& r : rows) (r.key == "S" ? curves : sinf).push_back(r);
  std::vector<std::string> files;
  write_long_csv(join(dir, "scan_samples.csv"), curves);
  files.push_back("scan_samples.csv");
  const auto avg = average_rows(sinf);
  write_averaged_csv(join(dir, "sinf.csv"), avg);
  files.push_back("sinf.csv");

  std::vector<std::pair<int, double>> pts;
  for (const auto& r : avg) pts.emplace_back(r.index, r.mean);
  if (pts.size() >= 3) {
    const FitResult f = fit_ceff(pts, L, cfg.scan.keep_edges);
    auto out = open_out(join(dir, "fit.csv"));
    out << "parameter,value\n";
    for (std::size_t i = 0; i < f.names.size(); ++i) out << f.names[i] << ',' << fmt(f.params[i]) << '\n';
    out << "residual_rms," << fmt(f.residual_rms) << "\npoints," << f.points << "\nexcluded," << f.excluded << '\n';
    files.push_back("fit.csv");
  }
  return files;
}

std::vector<std::string> cmd_single_particle(const ExperimentConfig& cfg, const std::string& dir,
                                             json& samples_out) {
  const auto samples = samples_of(cfg.ensemble);
  samples_out = samples_json(samples);
  const int L = cfg.model.L;
  const int j0 = cfg.single_particle.j0 >= 0 ? cfg.single_particle.j0 : 3 * L / 4;
  if (j0 >= L) throw ConfigError("single_particle.j0 outside the chain");
  const std::vector<double> Ws =
      cfg.single_particle.W.empty() ? std::vector<double>{cfg.model.W} : cfg.single_particle.W;
  const auto times = cfg.run.times.build();

  struct Task {
    std::size_t w;
    SampleInfo s;
    std::vector<LongRow> rows;
    double v = 0;
  };
  std::vector<Task> tasks;
  for (std::size_t w = 0; w < Ws.size(); ++w)
    for (const auto& s : samples) tasks.push_back({w, s, {}, 0.0});
  parallel_tasks(static_cast<int>(tasks.size()), [&](int i) {
    Task& task = tasks[static_cast<std::size_t>(i)];
    ModelParams p = cfg.model;
    p.W = Ws[task.w];
    p.theta = task.s.theta;
    const SingleParticlePropagator prop(single_particle_hamiltonian(p));
    CVec psi0 = CVec::Zero(L);
    psi0[j0] = 1.0;
    PositionTracker tracker(L);
    std::vector<double> ft, fx;
    const int sample = task.s.index + static_cast<int>(task.w) * cfg.ensemble.n_samples;
    for (double t : times) {
      const CVec psi = t == 0.0 ? psi0 : prop.propagate(psi0, t);
      const auto o = wavepacket_observables(psi);
      const double x = tracker.update(o.mean_x);
      task.rows.push_back({sample, t, "x", 0, x});
      task.rows.push_back({sample, t, "variance", 0, o.variance});
      for (Eigen::Index m = 0; m < o.momentum_density.size(); ++m)
        task.rows.push_back({sample, t, "pk", static_cast<int>(m), o.momentum_density[m]});
      if (t >= cfg.single_particle.fit_t_min) {
        ft.push_back(t);
        fx.push_back(x);
      }
    }
    if (ft.size() >= 2) {
      const double n = static_cast<double>(ft.size());
      double st = 0, sx = 0, stt = 0, stx = 0;
      for (std::size_t k = 0; k < ft.size(); ++k) {
        st += ft[k];
        sx += fx[k];
        stt += ft[k] * ft[k];
        stx += ft[k] * fx[k];
      }
      task.v = (n * stx - st * sx) / (n * stt - st * st);
    } else {
      task.v = std::nan("");
    }
  });
  std::vector<LongRow> all;
  for (const auto& t : tasks) all.insert(all.end(), t.rows.begin(), t.rows.end());
  std::vector<std::string> files;
  write_long_csv(join(dir, "wavepacket.csv"), all);
  files.push_back("wavepacket.csv");
  auto out = open_out(join(dir, "velocity.csv"));
  out << "W,sample,theta,v_measured,v_perturbative\n";
  for (const auto& t : tasks)
    out << fmt(Ws[t.w]) << ',' << t.s.index << ',' << fmt(t.s.theta) << ',' << fmt(t.v) << ','
        << fmt(-perturbative_sliding_speed(cfg.model.g, Ws[t.w])) << '\n';
  files.push_back("velocity.csv");
  return files;
}

std::vector<std::string> cmd_qpp(const ExperimentConfig& cfg, const std::string& dir) {
  const int L = cfg.model.L;
  const auto times = cfg.run.times.build();
  std::vector<int> ells = cfg.qpp.ells;
  if (ells.empty()) ells.push_back(L / 2);
  std::vector<LongRow> rows;
  const RVec k = momentum_grid(L);
  for (double t : times) {
    for (int ell : ells)
      rows.push_back({0, t, "S_qpp", ell,
                      qpp_entropy(L, ell, cfg.model.g, t, cfg.qpp.time_dependent_weights, cfg.qpp.factor2)});
    for (Eigen::Index m = 0; m < k.size(); ++m)
      rows.push_back({0, t, "n_gge", static_cast<int>(m), gge_nk(k[m], cfg.model.g, t, 0.0, cfg.qpp.factor2)});
  }
  write_long_csv(join(dir, "qpp.csv"), rows);
  return {"qpp.csv"};
}

std::vector<std::string> cmd_fit(const ExperimentConfig& cfg, const std::string& dir) {
  if (cfg.fit.input.empty()) throw ConfigError("fit.input is required");
  const auto rows = read_averaged_csv(cfg.fit.input);
  FitResult f;
  if (cfg.fit.kind == "ceff") {
    std::vector<std::pair<int, double>> pts;
    for (const auto& r : rows)
      if (r.key == "S_inf") pts.emplace_back(r.index, r.mean);
    if (pts.empty()) throw ConfigError("fit: no S_inf rows in " + cfg.fit.input);
    f = fit_ceff(pts, cfg.model.L, cfg.fit.keep_edges);
  } else {
    const int L = cfg.model.L;
    if (cfg.fit.m < 0 || cfg.fit.m >= L) throw ConfigError("fit.m must index the momentum grid [0, L)");
    std::vector<std::pair<double, double>> series;
    for (const auto& r : rows)
      if (r.key == "nk" && r.index == cfg.fit.m && r.t > 0.0) series.emplace_back(r.t, r.mean);
    if (series.empty()) throw ConfigError("fit: no nk rows for index " + std::to_string(cfg.fit.m));
    f = fit_nk_relaxation(series, momentum_grid(L)[cfg.fit.m], cfg.model.g);
  }
  auto out = open_out(join(dir, "fit.csv"));
  out << "parameter,value\n";
  for (std::size_t i = 0; i < f.names.size(); ++i) out << f.names[i] << ',' << fmt(f.params[i]) << '\n';
  out << "residual_rms," << fmt(f.residual_rms) << "\npoints," << f.points << "\nexcluded," << f.excluded << '\n';
  return {"fit.csv"};
}

}  // namespace

std::vector<TrajectoryRecord> run_evolve_samples(const ExperimentConfig& cfg) {
  const auto samples = samples_of(cfg.ensemble);
  const auto times = cfg.run.times.build();
  RecordSpec rs;
  rs.nj = cfg.observables.nj;
  rs.nk = cfg.observables.nk;
  rs.corr = cfg.observables.corr;
  rs.ells = cfg.observables.ells;
  std::vector<TrajectoryRecord> recs(samples.size());
  parallel_tasks(static_cast<int>(samples.size()), [&](int i) {
    recs[static_cast<std::size_t>(i)] = run_one_trajectory(cfg, samples[static_cast<std::size_t>(i)], times, rs);
  });
  return recs;
}

std::vector<std::string> run_experiment(const std::string& command, const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.threads > 0) kernels::set_threads(cfg.threads);
  const std::string dir = cfg.output_dir;
  fs::create_directories(dir);
  json samples = json::array();
  std::vector<std::string> files;
  if (command == "evolve")
    files = cmd_evolve(cfg, dir, samples);
  else if (command == "spectrum")
    files = cmd_spectrum(cfg, dir, samples);
  else if (command == "scan-entanglement")
    files = cmd_scan(cfg, dir, samples);
  else if (command == "single-particle")
    files = cmd_single_particle(cfg, dir, samples);
  else if (command == "qpp")
    files = cmd_qpp(cfg, dir);
  else if (command == "fit")
    files = cmd_fit(cfg, dir);
  else
    throw ConfigError("unknown command '" + command + "'");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  files.push_back("manifest.json");
  write_manifest(dir, command, cfg, samples, files, wall);
  return files;
}

}  // namespace hnsim
