// Copyright 2026 The dipesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dipesim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "dipesim/ensembles.hpp"
#include "dipesim/oracles.hpp"

namespace dipesim::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw std::invalid_argument(what + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

template <typename T>
std::string str(T v) {
  return std::to_string(v);
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  out << csv_row(cols) << '\n';
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

// Runs fn(i) for i in [0, count) on `workers` threads. Exceptions are
// rethrown on the calling thread (first one wins).
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

// Purposes for derive_seed.
constexpr std::uint64_t kPurposeStateA = 1;
constexpr std::uint64_t kPurposeStateB = 2;
constexpr std::uint64_t kPurposeRun = 3;
constexpr std::uint64_t kPurposeCoin = 4;

Protocol parse_protocol(const std::string& s) {
  if (s == "alg1") return Protocol::kAlg1;
  if (s == "alg2") return Protocol::kAlg2;
  throw std::invalid_argument("protocol must be alg1 or alg2, got '" + s + "'");
}

}  // namespace

// ---- CSV ----------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

// ---- State sources ------------------------------------------------------------

StateSpec StateSpec::parse(const std::string& text) {
  StateSpec s;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto need_arg = [&](const char* what) {
    if (arg.empty()) throw std::invalid_argument(std::string(what) + " needs an argument");
  };
  if (head == "haar" && arg.empty()) {
    s.kind = Kind::kHaar;
  } else if (head == "induced") {
    need_arg("induced:<dE>");
    s.kind = Kind::kInduced;
    s.param = parse_u64(arg, "induced:<dE>");
    if (s.param == 0) throw std::invalid_argument("induced:<dE> needs dE >= 1");
  } else if (head == "mixture") {
    need_arg("mixture:<r>");
    s.kind = Kind::kMixture;
    s.param = parse_u64(arg, "mixture:<r>");
    if (s.param == 0) throw std::invalid_argument("mixture:<r> needs r >= 1");
  } else if (head == "file") {
    need_arg("file:<path>");
    s.kind = Kind::kFile;
    s.path = arg;
  } else if (head == "mixed" && arg.empty()) {
    s.kind = Kind::kMixed;
  } else if (head == "pure-basis") {
    s.kind = Kind::kPureBasis;
    s.param = arg.empty() ? 0 : parse_u64(arg, "pure-basis:<i>");
  } else if (head == "same" && arg.empty()) {
    s.kind = Kind::kSame;
  } else {
    throw std::invalid_argument("unknown state source '" + text + "'");
  }
  return s;
}

std::string StateSpec::to_string() const {
  switch (kind) {
    case Kind::kHaar: return "haar";
    case Kind::kInduced: return "induced:" + str(param);
    case Kind::kMixture: return "mixture:" + str(param);
    case Kind::kFile: return "file:" + path;
    case Kind::kMixed: return "mixed";
    case Kind::kPureBasis: return "pure-basis:" + str(param);
    case Kind::kSame: return "same";
  }
  return "";
}

DensityMatrix make_state(const StateSpec& spec, int n, Rng& rng) {
  if (n < 0 || n > 30) throw std::invalid_argument("n must lie in [0, 30]");
  const std::size_t d = std::size_t{1} << n;
  if (d > dim_cap()) throw CapError("2^n exceeds the dimension cap");
  switch (spec.kind) {
    case StateSpec::Kind::kHaar: return haar_state(d, rng);
    case StateSpec::Kind::kInduced: return induced_state({n, spec.param}, rng);
    case StateSpec::Kind::kMixture: return convex_mixture({d, spec.param}, rng);
    case StateSpec::Kind::kFile: {
      DensityMatrix s = load_state_file(spec.path);
      if (s.dim() != d) {
        throw std::invalid_argument("state file " + spec.path + " has dimension " + str(s.dim()) +
                                    ", expected " + str(d));
      }
      return s;
    }
    case StateSpec::Kind::kMixed: return DensityMatrix::maximally_mixed(d);
    case StateSpec::Kind::kPureBasis:
      if (spec.param >= d) throw std::invalid_argument("pure-basis index out of range");
      return DensityMatrix::basis(d, spec.param);
    case StateSpec::Kind::kSame: break;
  }
  throw std::invalid_argument("'same' must be resolved against another state");
}

DensityMatrix load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open state file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("state file " + path + ": " + e.what());
  }
  try {
    const auto d = j.at("dim").get<std::size_t>();
    if (d == 0 || d > dim_cap()) throw CapError("state file dimension out of range");
    const auto& re = j.at("re");
    const bool has_im = j.contains("im");
    Matrix m(d, d);
    if (re.size() != d || (has_im && j["im"].size() != d)) {
      throw std::invalid_argument("state file " + path + ": expected " + str(d) + " rows");
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (re[i].size() != d || (has_im && j["im"][i].size() != d)) {
        throw std::invalid_argument("state file " + path + ": ragged row " + str(i));
      }
      for (std::size_t c = 0; c < d; ++c) {
        const double im = has_im ? j["im"][i][c].get<double>() : 0.0;
        m(i, c) = Complex(re[i][c].get<double>(), im);
      }
    }
    return DensityMatrix(std::move(m));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("state file " + path + ": " + e.what());
  }
}

std::pair<DensityMatrix, DensityMatrix> draw_state_pair(const std::string& spec_a,
                                                  const std::string& spec_b, int n,
                                                  std::uint64_t seed, std::uint64_t index) {
  const StateSpec a = StateSpec::parse(spec_a);
  const StateSpec b = StateSpec::parse(spec_b);
  if (a.kind == StateSpec::Kind::kSame) throw std::invalid_argument("state-a cannot be 'same'");
  Rng ra(seed, stream_id(StreamTag::kState, (kPurposeStateA << 40) | index));
  DensityMatrix rho = make_state(a, n, ra);
  if (b.kind == StateSpec::Kind::kSame) return {rho, rho};
  Rng rb(seed, stream_id(StreamTag::kState, (kPurposeStateB << 40) | index));
  DensityMatrix sigma = make_state(b, n, rb);
  return {std::move(rho), std::move(sigma)};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) {
  Rng r(master, stream_id(StreamTag::kTrial, (purpose << 40) | index));
  return r.next_u64();
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

// ---- Config files -------------------------------------------------------------

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument(path + ":" + str(lineno) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// ---- Run records --------------------------------------------------------------

const std::vector<std::string>& run_record_columns() {
  static const std::vector<std::string> cols = {
      "run_id", "protocol", "n",        "k",     "epsilon",   "N_b",     "m",
      "N_k",    "seed",     "estimate", "stderr", "exact",    "abs_error", "wall_ms"};
  return cols;
}

std::vector<std::string> to_fields(const RunRecord& r) {
  return {r.run_id,
          r.protocol,
          str(r.n),
          str(r.k),
          fmt_double(r.epsilon),
          str(r.num_batches),
          str(r.copies_per_batch),
          str(r.fk_copies),
          str(r.seed),
          fmt_double(r.estimate),
          fmt_optional(r.std_error),
          fmt_double(r.exact),
          fmt_double(r.abs_error),
          fmt_double(r.wall_ms)};
}

void write_run_records(std::ostream& out, const std::vector<RunRecord>& rows, bool header) {
  if (header) write_header(out, run_record_columns());
  for (const auto& r : rows) out << csv_row(to_fields(r)) << '\n';
}

const std::vector<std::string>& check_report_columns() {
  static const std::vector<std::string> cols = {"name",   "params",  "residual", "threshold",
                                                "passed", "samples", "seed"};
  return cols;
}

void write_check_reports(std::ostream& out, const std::vector<CheckReport>& rows,
                         std::uint64_t seed, bool header) {
  if (header) write_header(out, check_report_columns());
  for (const auto& r : rows) {
    out << csv_row({r.name, r.params, fmt_double(r.residual), fmt_double(r.threshold),
                    r.passed ? "1" : "0", str(r.samples), str(seed)})
        << '\n';
  }
}

// ---- estimate -----------------------------------------------------------------

ProtocolConfig budget_for(Protocol protocol, int n, int k, double epsilon, double calibration,
                          std::uint64_t seed) {
  ProtocolConfig chosen = choose_params(n, k, epsilon, calibration, seed);
  if (chosen.protocol == protocol) return chosen;
  // choose_params picked the other protocol: recompute this one's budget.
  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  ProtocolConfig c = chosen;
  c.protocol = protocol;
  if (protocol == Protocol::kAlg2) {
    c.num_batches =
        static_cast<std::uint64_t>(std::ceil(calibration * std::ldexp(1.0, n - k) * inv_eps2));
    c.copies_per_batch = 1;
    c.fk_copies = static_cast<std::uint64_t>(std::ceil(calibration * inv_eps2));
  } else {
    const double sqrt_d_over_eps = std::sqrt(std::ldexp(1.0, n)) / epsilon;
    const auto total = static_cast<std::uint64_t>(
        std::ceil(calibration * std::max(inv_eps2, sqrt_d_over_eps)));
    const std::uint64_t max_m = std::max<std::uint64_t>(1, total / 2);
    c.copies_per_batch = std::clamp<std::uint64_t>(
        static_cast<std::uint64_t>(std::ceil(sqrt_d_over_eps)), 1, max_m);
    c.num_batches = (total + c.copies_per_batch - 1) / c.copies_per_batch;
    c.fk_copies = 0;
  }
  return c;
}

ProtocolConfig resolve_config(const EstimateOptions& o) {
  ProtocolConfig c;
  if (o.protocol == "auto") {
    c = choose_params(o.n, o.k, o.epsilon, o.calibration, o.seed);
  } else if (o.protocol == "alg1") {
    c = budget_for(Protocol::kAlg1, o.n, o.k, o.epsilon, o.calibration, o.seed);
  } else if (o.protocol == "alg2" || o.protocol == "purity") {
    c = budget_for(Protocol::kAlg2, o.n, o.k, o.epsilon, o.calibration, o.seed);
  } else if (o.protocol == "swap") {
    c = budget_for(Protocol::kAlg2, o.n, o.n, o.epsilon, o.calibration, o.seed);
    c.num_batches = 0;
    c.copies_per_batch = 0;
  } else {
    throw std::invalid_argument("unknown protocol '" + o.protocol +
                                "' (auto, alg1, alg2, purity, swap)");
  }
  if (o.num_batches) c.num_batches = *o.num_batches;
  if (o.copies_per_batch) c.copies_per_batch = *o.copies_per_batch;
  if (o.fk_copies) c.fk_copies = *o.fk_copies;
  c.record_transcript = false;
  if (o.protocol != "swap") c.validate();
  return c;
}

RunRecord run_estimate(const EstimateOptions& o) {
  const ProtocolConfig c = resolve_config(o);
  const auto start = std::chrono::steady_clock::now();
  RunRecord r;
  r.run_id = o.run_id;
  r.n = o.n;
  r.k = o.k;
  r.epsilon = o.epsilon;
  r.num_batches = c.num_batches;
  r.copies_per_batch = c.copies_per_batch;
  r.fk_copies = c.fk_copies;
  r.seed = o.seed;

  Estimate e;
  if (o.protocol == "purity") {
    auto [rho, unused] = draw_state_pair(o.state_a, "same", o.n, o.seed, 0);
    (void)unused;
    r.protocol = "purity";
    e = purity_estimate(rho, c).estimate;
    r.exact = purity(rho);
  } else {
    auto [rho, sigma] = draw_state_pair(o.state_a, o.state_b, o.n, o.seed, 0);
    r.exact = inner_product(rho, sigma);
    if (o.protocol == "swap") {
      if (c.fk_copies < 1) throw std::invalid_argument("swap needs N_k >= 1");
      r.protocol = "swap";
      r.k = o.n;
      Rng rng(o.seed, stream_id(StreamTag::kPartialSwap, 0));
      e = alg2_fk_phase(rho, sigma, o.n, c.fk_copies, rng);
    } else {
      r.protocol = to_string(c.protocol);
      e = run_protocol(rho, sigma, c).estimate;
    }
  }
  r.estimate = e.value;
  r.std_error = e.std_error;
  r.abs_error = std::abs(r.estimate - r.exact);
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count();
  return r;
}

// ---- sweep --------------------------------------------------------------------

SweepMode parse_sweep_mode(const std::string& s) {
  if (s == "variance") return SweepMode::kVariance;
  if (s == "error") return SweepMode::kError;
  if (s == "success") return SweepMode::kSuccess;
  throw std::invalid_argument("sweep mode must be variance, error or success");
}

std::string to_string(SweepMode m) {
  switch (m) {
    case SweepMode::kVariance: return "variance";
    case SweepMode::kError: return "error";
    case SweepMode::kSuccess: return "success";
  }
  return "";
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "mode", "protocol", "n",     "k",     "epsilon",        "N",           "N_b", "m",
      "N_k",  "reps",     "seed",  "exact", "var_w",          "var_w_exact", "mean_abs_error",
      "success_rate"};
  return cols;
}

void write_sweep_rows(std::ostream& out, const std::vector<SweepRow>& rows, bool header) {
  if (header) write_header(out, sweep_columns());
  for (const auto& r : rows) {
    out << csv_row({to_string(r.mode), r.protocol, str(r.n), str(r.k), fmt_double(r.epsilon),
                    str(r.total_copies), str(r.num_batches), str(r.copies_per_batch),
                    str(r.fk_copies), str(r.reps), str(r.seed), fmt_double(r.exact),
                    fmt_optional(r.var_w), fmt_optional(r.var_w_exact),
                    fmt_optional(r.mean_abs_error), fmt_optional(r.success_rate)})
        << '\n';
  }
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope: need >= 2 points");
  const double nn = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nn;
  my /= nn;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ls_slope: x values are all equal");
  return sxy / sxx;
}

std::vector<SweepRow> run_sweep(const SweepOptions& o) {
  if (o.reps == 0) throw std::invalid_argument("sweep: reps must be >= 1");
  std::vector<SweepRow> rows;

  if (o.mode == SweepMode::kVariance) {
    for (int n : o.ns) {
      for (int k : o.ks) {
        if (k < 0 || k > n) continue;
        SweepRow r;
        r.mode = o.mode;
        r.protocol = "alg2";
        r.n = n;
        r.k = k;
        r.num_batches = o.reps;
        r.copies_per_batch = o.copies_per_batch;
        r.fk_copies = 1;
        r.reps = o.reps;
        r.total_copies = o.reps * o.copies_per_batch;
        r.seed = o.seed;
        rows.push_back(r);
      }
    }
    parallel_for(rows.size(), o.workers, [&](std::size_t i) {
      SweepRow& r = rows[i];
      // States depend on n only, so every k sees the same pair.
      auto [rho, sigma] = draw_state_pair(o.state_a, o.state_b, r.n, o.seed, static_cast<std::uint64_t>(r.n));
      ProtocolConfig c;
      c.protocol = Protocol::kAlg2;
      c.n = r.n;
      c.k = r.k;
      c.num_batches = r.num_batches;
      c.copies_per_batch = r.copies_per_batch;
      c.fk_copies = r.fk_copies;
      c.record_transcript = false;
      c.master_seed = derive_seed(o.seed, kPurposeRun, i);
      const RunResult res = alg2_run(rho, sigma, c);
      r.exact = inner_product(rho, sigma);
      r.var_w = sample_variance(res.batch_values);
      if (r.copies_per_batch == 1) r.var_w_exact = alg2_single_copy_variance(rho, sigma, r.k);
    });
    return rows;
  }

  // Error and success modes: one task per (cell, repetition).
  struct Cell {
    SweepRow row;
    ProtocolConfig config;
  };
  std::vector<Cell> cells;
  for (int n : o.ns) {
    for (int k : o.ks) {
      if (k < 0 || k > n) continue;
      if (o.mode == SweepMode::kError) {
        for (std::uint64_t budget : o.budgets) {
          Cell c;
          c.config.n = n;
          c.config.k = k;
          c.config.protocol = parse_protocol(o.protocol);
          if (c.config.protocol == Protocol::kAlg2) {
            c.config.copies_per_batch = 1;
            c.config.num_batches = budget;
            c.config.fk_copies = budget;
          } else {
            c.config.copies_per_batch = std::max<std::uint64_t>(1, o.copies_per_batch);
            c.config.num_batches = std::max<std::uint64_t>(1, budget / c.config.copies_per_batch);
            c.config.fk_copies = 0;
          }
          c.config.epsilon = o.epsilons.empty() ? 0.1 : o.epsilons.front();
          c.row.total_copies = budget;
          cells.push_back(c);
        }
      } else {
        for (double eps : o.epsilons) {
          Cell c;
          c.config = choose_params(n, k, eps, o.calibration);
          c.row.total_copies = c.config.total_copies() + c.config.fk_copies;
          cells.push_back(c);
        }
      }
    }
  }
  for (auto& c : cells) {
    c.config.record_transcript = false;
    c.row.mode = o.mode;
    c.row.protocol = to_string(c.config.protocol);
    c.row.n = c.config.n;
    c.row.k = c.config.k;
    c.row.epsilon = c.config.epsilon;
    c.row.num_batches = c.config.num_batches;
    c.row.copies_per_batch = c.config.copies_per_batch;
    c.row.fk_copies = c.config.fk_copies;
    c.row.reps = o.reps;
    c.row.seed = o.seed;
  }

  const std::size_t tasks = cells.size() * o.reps;
  std::vector<double> abs_err(tasks), exact(tasks);
  parallel_for(tasks, o.workers, [&](std::size_t t) {
    const std::size_t ci = t / o.reps;
    const Cell& cell = cells[ci];
    // Error mode keeps one state pair per n; success mode redraws per trial.
    const std::uint64_t state_index =
        o.mode == SweepMode::kError ? static_cast<std::uint64_t>(cell.config.n) : t;
    auto [rho, sigma] = draw_state_pair(o.state_a, o.state_b, cell.config.n, o.seed, state_index);
    ProtocolConfig c = cell.config;
    c.master_seed = derive_seed(o.seed, kPurposeRun, t);
    const double w = run_protocol(rho, sigma, c).estimate.value;
    exact[t] = inner_product(rho, sigma);
    abs_err[t] = std::abs(w - exact[t]);
  });

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    SweepRow r = cells[ci].row;
    double sum = 0.0, ex = 0.0;
    std::uint64_t ok = 0;
    for (std::uint64_t j = 0; j < o.reps; ++j) {
      const double e = abs_err[ci * o.reps + j];
      sum += e;
      ex += exact[ci * o.reps + j];
      if (e <= r.epsilon) ++ok;
    }
    r.exact = ex / static_cast<double>(o.reps);
    r.mean_abs_error = sum / static_cast<double>(o.reps);
    if (o.mode == SweepMode::kSuccess) {
      r.success_rate = static_cast<double>(ok) / static_cast<double>(o.reps);
    }
    rows.push_back(r);
  }
  return rows;
}

// ---- distinguish ----------------------------------------------------------------

DistinguishMode parse_distinguish_mode(const std::string& s) {
  if (s == "purity") return DistinguishMode::kPurity;
  if (s == "oracle") return DistinguishMode::kOracle;
  if (s == "dipe1") return DistinguishMode::kDipe1;
  if (s == "dipe2") return DistinguishMode::kDipe2;
  throw std::invalid_argument("distinguish mode must be purity, oracle, dipe1 or dipe2");
}

std::string to_string(DistinguishMode m) {
  switch (m) {
    case DistinguishMode::kPurity: return "purity";
    case DistinguishMode::kOracle: return "oracle";
    case DistinguishMode::kDipe1: return "dipe1";
    case DistinguishMode::kDipe2: return "dipe2";
  }
  return "";
}

Truth parse_truth(const std::string& s) {
  if (s == "coin") return Truth::kCoin;
  if (s == "null" || s == "mixed") return Truth::kNull;
  if (s == "alt" || s == "induced" || s == "same") return Truth::kAlt;
  throw std::invalid_argument("truth must be coin, null or alt");
}

DistinguishResult run_distinguish(const DistinguishOptions& o) {
  if (o.trials == 0) throw std::invalid_argument("distinguish: trials must be >= 1");
  if (o.n < 1) throw std::invalid_argument("distinguish: n must be >= 1");
  DistinguishResult res;
  res.mode = o.mode;
  res.n = o.n;
  res.k = o.k;
  res.epsilon = o.epsilon;
  res.trials = o.trials;
  res.seed = o.seed;
  const std::size_t d = std::size_t{1} << o.n;
  const double inv_d = 1.0 / static_cast<double>(d);

  const bool purity_mode = o.mode == DistinguishMode::kPurity || o.mode == DistinguishMode::kOracle;
  std::size_t d_e = 0;
  ProtocolConfig budget;
  if (purity_mode) {
    const double de = 1.0 / o.epsilon;
    d_e = static_cast<std::size_t>(std::llround(de));
    if (d_e < 1 || std::abs(de - static_cast<double>(d_e)) > 1e-9) {
      throw std::invalid_argument("distinguish: 1/epsilon must be a positive integer");
    }
    res.threshold = inv_d + o.epsilon / 3.0;
    budget = budget_for(Protocol::kAlg2, o.n, o.k, o.epsilon / 3.0, o.calibration, 0);
  } else {
    budget = budget_for(Protocol::kAlg1, o.n, 0, o.epsilon, o.calibration, 0);
    res.k = 0;
  }
  if (o.num_batches) budget.num_batches = *o.num_batches;
  if (o.copies_per_batch) budget.copies_per_batch = *o.copies_per_batch;
  if (o.fk_copies) budget.fk_copies = *o.fk_copies;
  budget.record_transcript = false;
  if (o.mode != DistinguishMode::kOracle) budget.validate();
  res.num_batches = budget.num_batches;
  res.copies_per_batch = budget.copies_per_batch;
  res.fk_copies = budget.fk_copies;

  // DIPE I fixes one spectrum for all trials.
  std::optional<DensityMatrix> base;
  if (o.mode == DistinguishMode::kDipe1) {
    Rng r(o.seed, stream_id(StreamTag::kState, kPurposeStateA << 40));
    base = make_state(StateSpec::parse(o.base_state), o.n, r);
    const double p = purity(*base);
    res.threshold = 0.5 * (p + inv_d);
  } else if (o.mode == DistinguishMode::kDipe2) {
    if (o.rank == 0) throw std::invalid_argument("distinguish: rank must be >= 1");
    const double r = static_cast<double>(o.rank);
    const double p = (1.0 / r) * (1.0 + (r - 1.0) * inv_d);
    res.threshold = 0.5 * (p + inv_d);
  }

  for (std::uint64_t t = 0; t < o.trials; ++t) {
    Rng coin(derive_seed(o.seed, kPurposeCoin, t), 0);
    bool alt = false;
    switch (o.truth) {
      case Truth::kCoin: alt = coin.uniform() < 0.5; break;
      case Truth::kNull: alt = false; break;
      case Truth::kAlt: alt = true; break;
    }
    Rng state_rng(o.seed, stream_id(StreamTag::kState, (kPurposeStateB << 40) | t));
    ProtocolConfig c = budget;
    c.master_seed = derive_seed(o.seed, kPurposeRun, t);
    bool decide_alt = false;
    if (purity_mode) {
      const DensityMatrix state =
          alt ? induced_state({o.n, d_e}, state_rng) : DensityMatrix::maximally_mixed(d);
      const double p = o.mode == DistinguishMode::kOracle ? purity(state)
                                                         : purity_estimate(state, c).estimate.value;
      decide_alt = p >= res.threshold;
    } else {
      DensityMatrix a = o.mode == DistinguishMode::kDipe1 ? conjugated(*base, state_rng)
                                                          : convex_mixture({d, o.rank}, state_rng);
      DensityMatrix b = a;
      if (!alt) {
        b = o.mode == DistinguishMode::kDipe1 ? conjugated(*base, state_rng)
                                              : convex_mixture({d, o.rank}, state_rng);
      }
      decide_alt = alg1_run(a, b, c).estimate.value > res.threshold;
    }
    if (decide_alt == alt) ++res.successes;
  }
  return res;
}

const std::vector<std::string>& distinguish_columns() {
  static const std::vector<std::string> cols = {"mode",      "n",   "k", "epsilon", "threshold",
                                                "trials",    "successes", "success_rate",
                                                "N_b",       "m",   "N_k", "seed"};
  return cols;
}

void write_distinguish(std::ostream& out, const std::vector<DistinguishResult>& rows,
                       bool header) {
  if (header) write_header(out, distinguish_columns());
  for (const auto& r : rows) {
    out << csv_row({to_string(r.mode), str(r.n), str(r.k), fmt_double(r.epsilon),
                    fmt_double(r.threshold), str(r.trials), str(r.successes),
                    fmt_double(r.success_rate()), str(r.num_batches), str(r.copies_per_batch),
                    str(r.fk_copies), str(r.seed)})
        << '\n';
  }
}

// ---- netsim ledger --------------------------------------------------------------

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> cols = {
      "run_id",          "protocol",
      "n",               "k",
      "N_b",             "m",
      "N_k",             "seed",
      "classical_bytes", "quantum_payload_bytes",
      "quantum_qubits_sent", "qstate_frames",
      "alice_to_bob_frames", "bob_to_alice_frames",
      "bob_to_alice_frames_after_ack", "estimate",
      "stderr"};
  return cols;
}

void write_ledger_row(std::ostream& out, const std::string& run_id, const ProtocolConfig& c,
                      const netsim::ChannelLedger& l, const std::optional<Estimate>& e,
                      bool header) {
  if (header) write_header(out, ledger_columns());
  out << csv_row({run_id, to_string(c.protocol), str(c.n), str(c.k), str(c.num_batches),
                  str(c.copies_per_batch), str(c.fk_copies), str(c.master_seed),
                  str(l.classical_bytes), str(l.quantum_payload_bytes), str(l.quantum_qubits_sent),
                  str(l.qstate_frames), str(l.alice_to_bob_frames), str(l.bob_to_alice_frames),
                  str(l.bob_to_alice_frames_after_ack), e ? fmt_double(e->value) : "",
                  e ? fmt_optional(e->std_error) : ""})
      << '\n';
}

}  // namespace dipesim::harness
