// compart-h2: command-line front end over the compart_h2 C API.
//
//   compart-h2 synthesize  --plant P --method sipm --k0 rank1:V [--config C] [--out R]
//   compart-h2 verify      --plant P --gain K [--t T]
//   compart-h2 grad-check  --plant P --gain K
//   compart-h2 init        --plant P [--gain K] [--out R]
//   compart-h2 bench-scale --plant P --k0 file:K --nmax 4 --mode paper-concat --out bench.csv

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "compart_h2/compart_h2.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix as exchanged with the C API.
struct Dense {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  double at(size_t i, size_t j) const { return data[i * cols + j]; }
};

struct PlantDeleter {
  void operator()(ch2_plant* p) const { ch2_plant_free(p); }
};
struct ReportDeleter {
  void operator()(ch2_report* r) const { ch2_report_free(r); }
};
using PlantPtr = std::unique_ptr<ch2_plant, PlantDeleter>;
using ReportPtr = std::unique_ptr<ch2_report, ReportDeleter>;

void check(ch2_status status, const std::string& context) {
  if (status != CH2_OK) {
    throw CliError(context + ": " + ch2_status_name(status) + ": " + ch2_last_error());
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CliError("parse error in " + path + ": " + e.what());
  }
}

Dense to_dense(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw CliError(what + " must be a non-empty array of rows");
  Dense m;
  m.rows = j.size();
  for (const auto& row : j) {
    if (!row.is_array()) throw CliError(what + " rows must be arrays");
    if (m.cols == 0) m.cols = row.size();
    if (row.size() != m.cols || m.cols == 0) throw CliError(what + " is ragged");
    for (const auto& x : row) {
      if (!x.is_number()) throw CliError(what + " has a non-numeric entry");
      m.data.push_back(x.get<double>());
    }
  }
  return m;
}

json from_dense(const Dense& m) {
  json rows = json::array();
  for (size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (size_t j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

Dense field(const json& doc, const char* key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw CliError(path + ": missing \"" + key + "\"");
  }
  return to_dense(doc.at(key), path + ":" + key);
}

PlantPtr load_plant(const std::string& path) {
  const json doc = read_json(path);
  const Dense A = field(doc, "A", path);
  const Dense B = field(doc, "B", path);
  const Dense C = field(doc, "C", path);
  const Dense D = field(doc, "D", path);
  const Dense G = field(doc, "G", path);
  if (A.rows != A.cols) throw CliError(path + ": A is not square");
  if (B.rows != A.rows || C.cols != A.rows || D.rows != C.rows || D.cols != B.cols ||
      G.rows != A.rows) {
    throw CliError(path + ": inconsistent plant dimensions");
  }
  ch2_plant* raw = nullptr;
  check(ch2_plant_create(A.data.data(), B.data.data(), C.data.data(), D.data.data(),
                         G.data.data(), A.rows, B.cols, C.rows, G.cols, &raw),
        path);
  return PlantPtr(raw);
}

struct Dims {
  size_t n, m, r, q;
};

Dims dims(const ch2_plant* p) {
  Dims d{};
  check(ch2_plant_dims(p, &d.n, &d.m, &d.r, &d.q), "plant");
  return d;
}

Dense load_gain(const std::string& path, const Dims& d) {
  Dense k = field(read_json(path), "K", path);
  if (k.rows != d.m || k.cols != d.n) {
    throw CliError(path + ": gain must be " + std::to_string(d.m) + "x" + std::to_string(d.n));
  }
  return k;
}

Dense zero_gain(const Dims& d) { return Dense{d.m, d.n, std::vector<double>(d.m * d.n, 0.0)}; }

// rank1 file: {"v": [[...m entries...] x n], "convention": "u=-Kx" | "u=+Kx"}.
Dense rank_one_from_file(const std::string& path, const Dims& d) {
  const json doc = read_json(path);
  const Dense v = field(doc, "v", path);
  if (v.rows != d.n || v.cols != d.m) {
    throw CliError(path + ": expected " + std::to_string(d.n) + " vectors of length " +
                   std::to_string(d.m));
  }
  Dense k{d.m, d.n, std::vector<double>(d.m * d.n)};
  check(ch2_rank_one_gain(v.data.data(), v.rows, v.cols, k.data.data()), path);
  const std::string convention = doc.value("convention", "u=-Kx");
  if (convention == "u=+Kx") {
    for (double& x : k.data) x = -x;
  } else if (convention != "u=-Kx") {
    throw CliError(path + ": unknown convention " + convention);
  }
  return k;
}

double phase1_gain(const ch2_plant* p, const Dense& start, double target, Dense& out) {
  out = start;
  double slack = 0.0;
  const ch2_status s = ch2_phase1(p, start.data.data(), target, out.data.data(), &slack);
  check(s, "k0");
  return slack;
}

Dense resolve_k0(const std::string& source, const ch2_plant* p) {
  const Dims d = dims(p);
  if (source == "phase1") {
    Dense k;
    phase1_gain(p, zero_gain(d), 1e-3, k);
    return k;
  }
  if (source.rfind("file:", 0) == 0) return load_gain(source.substr(5), d);
  if (source.rfind("rank1:", 0) == 0) return rank_one_from_file(source.substr(6), d);
  throw CliError("--k0 must be file:<path>, phase1 or rank1:<path>");
}

// Flags layered over an optional config file layered over library defaults.
struct Tuning {
  std::string config_file;
  std::optional<double> t0, mu, eps1, eps2, eps_r, delta;

  void add_flags(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file");
    app->add_option("--t0", t0, "initial barrier weight");
    app->add_option("--mu", mu, "barrier growth factor");
    app->add_option("--eps1", eps1, "inner gradient tolerance");
    app->add_option("--eps2", eps2, "outer step tolerance");
    app->add_option("--eps-r", eps_r, "constraint relaxation");
    app->add_option("--delta", delta, "Hessian eigenvalue floor");
  }

  ch2_config resolve() const {
    ch2_config c;
    ch2_config_default(&c);
    if (!config_file.empty()) {
      const json doc = read_json(config_file);
      if (!doc.is_object()) throw CliError(config_file + ": expected an object");
      auto real = [&](const char* key, double& dst) {
        if (doc.contains(key)) dst = doc.at(key).get<double>();
      };
      auto integer = [&](const char* key, int& dst) {
        if (doc.contains(key)) dst = doc.at(key).get<int>();
      };
      real("t0", c.t0);
      real("mu", c.mu);
      real("eps1", c.eps1);
      real("eps2", c.eps2);
      real("eps_r", c.eps_r);
      real("delta", c.delta);
      real("armijo_sigma", c.armijo_sigma);
      real("armijo_beta", c.armijo_beta);
      real("armijo_s0_fipm", c.armijo_s0_fipm);
      integer("max_inner_fipm", c.max_inner_fipm);
      integer("max_inner_sipm", c.max_inner_sipm);
      integer("max_outer", c.max_outer);
      integer("max_backtracks", c.max_backtracks);
      if (doc.contains("enforce_assumptions")) {
        c.enforce_assumptions = doc.at("enforce_assumptions").get<bool>() ? 1 : 0;
      }
    }
    if (t0) c.t0 = *t0;
    if (mu) c.mu = *mu;
    if (eps1) c.eps1 = *eps1;
    if (eps2) c.eps2 = *eps2;
    if (eps_r) c.eps_r = *eps_r;
    if (delta) c.delta = *delta;
    if (const char* env = std::getenv("COMPART_H2_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && *end == '\0' && v >= 0) c.threads = static_cast<int>(v);
    }
    return c;
  }
};

ch2_method parse_method(const std::string& s) { return s == "sipm" ? CH2_SIPM : CH2_FIPM; }

json kkt_json(const ch2_kkt& k) {
  return {{"stationarity", k.stationarity},
          {"dual_feasibility", k.dual_feasibility},
          {"primal_feasibility", k.primal_feasibility},
          {"complementarity", k.complementarity}};
}

void make_parent(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  make_parent(path);
  std::ofstream out(path);
  if (!out) throw CliError("cannot write " + path);
  out << text;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct RunResult {
  ReportPtr report;
  ch2_summary summary{};
  Dense gain;
  double seconds = 0.0;
};

RunResult run(const ch2_plant* p, const Dense& k0, ch2_method method, const ch2_config& cfg) {
  RunResult r;
  ch2_report* raw = nullptr;
  const auto start = std::chrono::steady_clock::now();
  check(ch2_solve(p, k0.data.data(), method, &cfg, &raw), "solve");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.report.reset(raw);
  check(ch2_report_summary(raw, &r.summary), "report");
  r.gain = Dense{k0.rows, k0.cols, std::vector<double>(k0.data.size())};
  check(ch2_report_gain(raw, r.gain.data.data()), "report");
  return r;
}

std::vector<ch2_trace_record> trace_of(const ch2_report* r) {
  std::vector<ch2_trace_record> out(ch2_report_trace_length(r));
  for (size_t i = 0; i < out.size(); ++i) check(ch2_report_trace(r, i, &out[i]), "trace");
  return out;
}

// ---- verbs ----

struct SynthesizeArgs {
  std::string plant, method = "sipm", k0 = "phase1", out;
  Tuning tuning;
};

int cmd_synthesize(const SynthesizeArgs& a) {
  PlantPtr plant = load_plant(a.plant);
  const ch2_config cfg = a.tuning.resolve();
  const Dense k0 = resolve_k0(a.k0, plant.get());
  const ch2_method method = parse_method(a.method);
  RunResult r = run(plant.get(), k0, method, cfg);

  json trace = json::array();
  for (const auto& rec : trace_of(r.report.get())) {
    trace.push_back({{"t", rec.t},
                     {"inner", rec.inner_iterations},
                     {"grad_norm", rec.grad_norm},
                     {"J", rec.J},
                     {"seconds", rec.cumulative_seconds}});
  }
  const json report = {{"K", from_dense(r.gain)},
                       {"J", r.summary.J},
                       {"method", a.method},
                       {"converged", r.summary.converged != 0},
                       {"kkt", kkt_json(r.summary.kkt)},
                       {"grad_norm", r.summary.grad_norm},
                       {"trace", trace}};
  write_text(a.out, report.dump(2) + "\n");
  std::cerr << a.method << ": J = " << g17(r.summary.J) << ", outer "
            << r.summary.outer_iterations << ", inner " << r.summary.total_inner_iterations
            << ", final t " << r.summary.final_t << ", " << r.seconds << " s\n";
  if (r.summary.assumption_warnings > 0) {
    std::cerr << "warning: plant violates the standing assumptions\n";
  }
  if (!r.summary.converged) {
    std::cerr << "iteration cap reached before convergence\n";
    return 2;
  }
  return 0;
}

struct VerifyArgs {
  std::string plant, gain;
  double t = 1048576.0;
  double eps_r = 1e-9;
};

int cmd_verify(const VerifyArgs& a) {
  PlantPtr plant = load_plant(a.plant);
  const Dense k = load_gain(a.gain, dims(plant.get()));
  ch2_verification v{};
  check(ch2_verify(plant.get(), k.data.data(), a.t, a.eps_r, &v), "verify");
  std::printf("schur: %s (spectral radius %.10g)\n", v.schur ? "true" : "false",
              v.spectral_radius);
  std::printf("compartmental: %s\n", v.compartmental ? "true" : "false");
  std::printf("strictly feasible: %s\n", v.strictly_feasible ? "true" : "false");
  std::printf("min_slack: %.17g at (%zu, %zu)\n", v.min_slack, v.worst_row, v.worst_col);
  if (v.cost_defined) {
    std::printf("J: %.17g\n", v.J);
  } else {
    std::printf("J: undefined (closed loop not Schur)\n");
  }
  std::printf("multiplier: %s at t = %g\n", v.multiplier_defined ? "recovered" : "zero", a.t);
  std::printf("kkt stationarity: %.6e\n", v.kkt.stationarity);
  std::printf("kkt dual_feasibility: %.6e\n", v.kkt.dual_feasibility);
  std::printf("kkt primal_feasibility: %.6e\n", v.kkt.primal_feasibility);
  std::printf("kkt complementarity: %.6e\n", v.kkt.complementarity);
  return v.schur && v.compartmental ? 0 : 1;
}

struct GradCheckArgs {
  std::string plant, gain;
  double t = 1.0;
  double eps_r = 1e-9;
};

int cmd_grad_check(const GradCheckArgs& a) {
  constexpr double kTol = 1e-4;
  PlantPtr plant = load_plant(a.plant);
  const Dense k = load_gain(a.gain, dims(plant.get()));
  ch2_derivative_check c{};
  check(ch2_grad_check(plant.get(), k.data.data(), a.t, a.eps_r, &c), "grad-check");
  bool ok = true;
  auto line = [&](const char* name, double err) {
    const bool pass = err < kTol;
    ok = ok && pass;
    std::printf("%-18s %.3e %s\n", name, err, pass ? "ok" : "FAIL");
  };
  line("grad_J", c.grad_J);
  line("hessian_J", c.hessian_J);
  std::printf("%-18s %.3e\n", "hessian_asymmetry", c.hessian_asymmetry);
  if (c.barrier_defined) {
    line("barrier_grad", c.barrier_grad);
    line("barrier_hessian", c.barrier_hessian);
  } else {
    std::printf("barrier derivatives skipped: gain is outside the relaxed interior\n");
  }
  return ok ? 0 : 1;
}

struct InitArgs {
  std::string plant, gain, out;
  double target = 1e-3;
};

int cmd_init(const InitArgs& a) {
  PlantPtr plant = load_plant(a.plant);
  const Dims d = dims(plant.get());
  const Dense start = a.gain.empty() ? zero_gain(d) : load_gain(a.gain, d);
  Dense k = start;
  double slack = 0.0;
  const ch2_status s = ch2_phase1(plant.get(), start.data.data(), a.target, k.data.data(), &slack);
  if (s != CH2_OK) {
    std::cerr << "error: init: " << ch2_status_name(s) << ": " << ch2_last_error() << "\n";
    return 1;
  }
  ch2_start_check sc{};
  check(ch2_check_start(plant.get(), k.data.data(), &sc), "init");
  write_text(a.out, json{{"K", from_dense(k)}, {"min_slack", slack}}.dump(2) + "\n");
  std::cerr << "phase1: min_slack " << slack << ", spectral radius " << sc.spectral_radius
            << (sc.ok ? "" : " (start check failed)") << "\n";
  return sc.ok ? 0 : 1;
}

struct BenchArgs {
  std::string plant, k0 = "phase1", out = "bench.csv", mode = "blockdiag";
  int nmax = 4;
  Tuning tuning;
};

std::string sibling(const std::string& csv, const std::string& suffix) {
  const auto dot = csv.rfind(".csv");
  const std::string stem = dot == std::string::npos ? csv : csv.substr(0, dot);
  return stem + suffix;
}

int cmd_bench(const BenchArgs& a) {
  if (a.nmax < 1) throw CliError("--nmax must be >= 1");
  PlantPtr base = load_plant(a.plant);
  const Dims d = dims(base.get());
  const Dense k0 = resolve_k0(a.k0, base.get());
  const bool concat = a.mode == "paper-concat";
  ch2_config cfg = a.tuning.resolve();
  if (concat) {
    cfg.enforce_assumptions = 0;
    std::cerr << "warning: paper-concat replication violates D^T D > 0 for N >= 2; "
                 "running anyway\n";
  }

  make_parent(a.out);
  std::ofstream csv(a.out);
  std::ofstream status(sibling(a.out, ".status.csv"));
  if (!csv || !status) throw CliError("cannot write " + a.out);
  csv << "N,method,seconds,J,outer_iters,total_inner_iters,final_grad_norm\n";
  status << "N,method,status,message\n";

  const std::string nan = "nan";
  for (int N = 1; N <= a.nmax; ++N) {
    const size_t copies = static_cast<size_t>(N);
    ch2_plant* raw = nullptr;
    check(ch2_plant_replicate(base.get(), copies,
                              concat ? CH2_REPLICATE_PAPER_CONCAT : CH2_REPLICATE_BLOCKDIAG, &raw),
          "replicate");
    PlantPtr plant(raw);
    Dense kN{d.m * copies, d.n * copies, std::vector<double>(d.m * d.n * copies * copies)};
    check(ch2_gain_block_diag(k0.data.data(), d.m, d.n, copies, kN.data.data()), "replicate");

    for (ch2_method method : {CH2_FIPM, CH2_SIPM}) {
      const std::string name = method == CH2_SIPM ? "sipm" : "fipm";
      try {
        RunResult r = run(plant.get(), kN, method, cfg);
        csv << N << ',' << name << ',' << g17(r.seconds) << ',' << g17(r.summary.J) << ','
            << r.summary.outer_iterations << ',' << r.summary.total_inner_iterations << ','
            << g17(r.summary.grad_norm) << '\n';
        status << N << ',' << name << ',' << (r.summary.converged ? "converged" : "capped")
               << ",\n";
        std::ofstream tr(sibling(a.out, "_N" + std::to_string(N) + "_" + name + "_trace.csv"));
        tr << "outer_iter,cumulative_seconds\n";
        int h = 0;
        for (const auto& rec : trace_of(r.report.get())) {
          tr << h++ << ',' << g17(rec.cumulative_seconds) << '\n';
        }
        std::cerr << "N=" << N << ' ' << name << ": J = " << g17(r.summary.J) << ", "
                  << r.seconds << " s\n";
      } catch (const CliError& e) {
        csv << N << ',' << name << ',' << nan << ',' << nan << ',' << nan << ',' << nan << ','
            << nan << '\n';
        std::string msg = e.what();
        for (char& ch : msg) {
          if (ch == ',' || ch == '\n') ch = ' ';
        }
        status << N << ',' << name << ",error," << msg << '\n';
        std::cerr << "N=" << N << ' ' << name << ": " << e.what() << "\n";
      }
      csv.flush();
      status.flush();
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"H2 state feedback with compartmental closed loops"};
  app.require_subcommand(1);
  const std::vector<std::string> methods{"fipm", "sipm"};

  SynthesizeArgs syn;
  auto* s = app.add_subcommand("synthesize", "run FIPM or SIPM and write a report");
  s->add_option("--plant", syn.plant, "plant JSON")->required();
  s->add_option("--method", syn.method)->check(CLI::IsMember(methods));
  s->add_option("--k0", syn.k0, "file:<path>, phase1 or rank1:<path>");
  s->add_option("--out", syn.out, "report path (stdout if omitted)");
  syn.tuning.add_flags(s);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "check a gain: Schur, compartmental, J, KKT");
  v->add_option("--plant", ver.plant)->required();
  v->add_option("--gain", ver.gain, "JSON with \"K\"")->required();
  v->add_option("--t", ver.t, "barrier weight used to recover the multiplier");
  v->add_option("--eps-r", ver.eps_r);

  GradCheckArgs gc;
  auto* g = app.add_subcommand("grad-check", "compare analytic derivatives with finite differences");
  g->add_option("--plant", gc.plant)->required();
  g->add_option("--gain", gc.gain)->required();
  g->add_option("--t", gc.t);
  g->add_option("--eps-r", gc.eps_r);

  InitArgs ini;
  auto* i = app.add_subcommand("init", "phase-I search for a strictly feasible gain");
  i->add_option("--plant", ini.plant)->required();
  i->add_option("--gain", ini.gain, "starting gain (zero if omitted)");
  i->add_option("--target", ini.target, "required min slack");
  i->add_option("--out", ini.out);

  BenchArgs bench;
  const std::vector<std::string> modes{"blockdiag", "paper-concat"};
  auto* b = app.add_subcommand("bench-scale", "FIPM vs SIPM on N replicated plants");
  b->add_option("--plant", bench.plant)->required();
  b->add_option("--k0", bench.k0);
  b->add_option("--nmax", bench.nmax);
  b->add_option("--mode", bench.mode)->check(CLI::IsMember(modes));
  b->add_option("--out", bench.out);
  bench.tuning.add_flags(b);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*s) return cmd_synthesize(syn);
    if (*v) return cmd_verify(ver);
    if (*g) return cmd_grad_check(gc);
    if (*i) return cmd_init(ini);
    if (*b) return cmd_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
