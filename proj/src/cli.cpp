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

#include "dipesim/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dipesim/ensembles.hpp"
#include "dipesim/harness.hpp"
#include "dipesim/identities.hpp"
#include "dipesim/netsim.hpp"

namespace dipesim::cli {
namespace {

using harness::fmt_double;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Output sink: --out file (optionally appended) or the caller's stream.
class Sink {
 public:
  Sink(std::ostream& fallback, const std::string& path, bool append) : stream_(&fallback) {
    if (path.empty() || path == "-") return;
    bool existing = false;
    if (append) {
      std::ifstream probe(path, std::ios::binary | std::ios::ate);
      existing = probe && probe.tellg() > 0;
    }
    file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
    if (!*file_) throw std::runtime_error("cannot open output file " + path);
    stream_ = file_.get();
    header_ = !existing;
  }
  std::ostream& stream() { return *stream_; }
  bool header() const { return header_; }

 private:
  std::ostream* stream_;
  std::unique_ptr<std::ofstream> file_;
  bool header_ = true;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// Fills options not given on the command line from a key=value file.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& [key, value] : harness::read_config_file(path)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError("config file " + path + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;  // command line wins
    if (opt->get_items_expected_max() > 1) {
      for (const auto& part : split(value, ',')) opt->add_result(part);
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  const std::uint64_t s = harness::entropy_seed();
  err << "dipesim: no --seed given, drew seed=" << s << "\n";
  return s;
}

struct Common {
  std::string out_path;
  bool append = false;
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out", c.out_path, "CSV output file (default: stdout)");
  sub->add_flag("--append", c.append, "Append to --out instead of truncating");
  sub->add_option("--config", c.config, "key=value file; command-line flags take precedence");
  sub->add_option("--seed", c.seed, "Master seed (default: drawn from OS entropy)");
}

// ---- estimate -------------------------------------------------------------------

struct EstimateArgs {
  Common common;
  harness::EstimateOptions opts;
  std::uint64_t repeat = 1;
};

void setup_estimate(CLI::App* sub, EstimateArgs& a) {
  auto& o = a.opts;
  sub->add_option("--protocol", o.protocol, "auto | alg1 | alg2 | purity | swap")
      ->capture_default_str();
  sub->add_option("--n", o.n, "Qubits per state")->capture_default_str();
  sub->add_option("--k", o.k, "Quantum channel width in qubits (alg2)")->capture_default_str();
  sub->add_option("--epsilon", o.epsilon, "Target accuracy")->capture_default_str();
  sub->add_option("--calibration", o.calibration, "Budget constant c")->capture_default_str();
  sub->add_option("--N-b", o.num_batches, "Number of batches (overrides the budget)");
  sub->add_option("--m", o.copies_per_batch, "Copies per batch (overrides the budget)");
  sub->add_option("--N-k", o.fk_copies, "Copies for the f_k phase (overrides the budget)");
  sub->add_option("--state-a", o.state_a,
                  "haar | induced:dE | mixture:r | file:path | mixed | pure-basis[:i]")
      ->capture_default_str();
  sub->add_option("--state-b", o.state_b, "Same sources as --state-a, or 'same'")
      ->capture_default_str();
  sub->add_option("--run-id", o.run_id, "Run identifier")->capture_default_str();
  sub->add_option("--repeat", a.repeat, "Independent repetitions (seeds derived from --seed)")
      ->capture_default_str();
  add_common(sub, a.common);
}

int cmd_estimate(EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(a.common.seed, err);
  if (a.repeat == 0) throw UsageError("--repeat must be >= 1");
  std::vector<harness::RunRecord> rows;
  for (std::uint64_t i = 0; i < a.repeat; ++i) {
    harness::EstimateOptions o = a.opts;
    o.seed = a.repeat == 1 ? seed : harness::derive_seed(seed, 100, i);
    if (a.repeat > 1) o.run_id = a.opts.run_id + "-" + std::to_string(i);
    rows.push_back(harness::run_estimate(o));
  }
  Sink sink(out, a.common.out_path, a.common.append);
  harness::write_run_records(sink.stream(), rows, sink.header());
  return kOk;
}

// ---- sweep ----------------------------------------------------------------------

struct SweepArgs {
  Common common;
  harness::SweepOptions opts;
  std::string mode = "variance";
  std::vector<int> ns;
  std::vector<int> ks;
  std::vector<double> epsilons;
  std::vector<std::uint64_t> budgets;
};

void setup_sweep(CLI::App* sub, SweepArgs& a) {
  auto& o = a.opts;
  sub->add_option("--mode", a.mode, "variance | error | success")->capture_default_str();
  sub->add_option("--n", a.ns, "Qubit counts (comma separated)")->delimiter(',');
  sub->add_option("--k", a.ks, "Channel widths (comma separated)")->delimiter(',');
  sub->add_option("--epsilon", a.epsilons, "Accuracies (comma separated)")->delimiter(',');
  sub->add_option("--budget", a.budgets, "Total copy budgets N for error mode")->delimiter(',');
  sub->add_option("--protocol", o.protocol, "alg1 | alg2 (error mode)")->capture_default_str();
  sub->add_option("--m", o.copies_per_batch, "Copies per batch (variance, alg1 error mode)")
      ->capture_default_str();
  sub->add_option("--reps", o.reps, "Batches per cell (variance) or repetitions per cell")
      ->capture_default_str();
  sub->add_option("--calibration", o.calibration, "Budget constant c (success mode)")
      ->capture_default_str();
  sub->add_option("--state-a", o.state_a, "State source for rho")->capture_default_str();
  sub->add_option("--state-b", o.state_b, "State source for sigma, or 'same'")
      ->capture_default_str();
  sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)")->capture_default_str();
  add_common(sub, a.common);
}

int cmd_sweep(SweepArgs& a, std::ostream& out, std::ostream& err) {
  auto& o = a.opts;
  o.seed = resolve_seed(a.common.seed, err);
  o.mode = harness::parse_sweep_mode(a.mode);
  if (!a.ns.empty()) o.ns = a.ns;
  if (!a.ks.empty()) o.ks = a.ks;
  if (!a.epsilons.empty()) o.epsilons = a.epsilons;
  if (!a.budgets.empty()) o.budgets = a.budgets;
  const auto rows = harness::run_sweep(o);
  if (o.mode == harness::SweepMode::kVariance) {
    for (int n : o.ns) {
      std::vector<double> x, y;
      for (const auto& r : rows) {
        if (r.n == n && r.var_w && *r.var_w > 0) {
          x.push_back(r.k);
          y.push_back(std::log2(*r.var_w));
        }
      }
      if (x.size() >= 2) {
        err << "n=" << n << " slope(log2 Var(w) vs k) = " << fmt_double(harness::ls_slope(x, y))
            << "\n";
      }
    }
  }
  Sink sink(out, a.common.out_path, a.common.append);
  harness::write_sweep_rows(sink.stream(), rows, sink.header());
  return kOk;
}

// ---- check ----------------------------------------------------------------------

struct CheckArgs {
  Common common;
  std::string suite;
  std::string name;
  std::uint64_t seeds = 1;
  std::size_t d = 2;
  std::size_t de = 2;
  int big_t = 2;
  int t = 2;
  int a = 1;
  int b = 1;
  double x = 1.0;
  int y = 1;
  int n = 1;
  int k = 0;
  std::uint64_t samples = 100000;
  std::string leaf = "equal";
  std::string instance = "computational";
};

void setup_check(CLI::App* sub, CheckArgs& c) {
  sub->add_option("--suite", c.suite, "exact | mc | all");
  sub->add_option("--name", c.name,
                  "Single check: haar, chiribella, mp, mp-displayed, perm, likelihood, "
                  "likelihood-norm, stirling, collision, povm, induced");
  sub->add_option("--seeds", c.seeds, "Monte Carlo suite repetitions (seeds seed..seed+S-1)")
      ->capture_default_str();
  sub->add_option("--d", c.d, "Local dimension")->capture_default_str();
  sub->add_option("--de", c.de, "Ancilla dimension d_E")->capture_default_str();
  sub->add_option("--T", c.big_t, "Outcome string length")->capture_default_str();
  sub->add_option("--t", c.t, "Number of copies / permutation degree")->capture_default_str();
  sub->add_option("--a", c.a, "Input copies")->capture_default_str();
  sub->add_option("--b", c.b, "Output copies")->capture_default_str();
  sub->add_option("--x", c.x, "Copies x (perm) or point x (stirling)")->capture_default_str();
  sub->add_option("--y", c.y, "Copies y (perm)")->capture_default_str();
  sub->add_option("--n", c.n, "Qubits")->capture_default_str();
  sub->add_option("--k", c.k, "Channel width")->capture_default_str();
  sub->add_option("--samples", c.samples, "Monte Carlo samples")->capture_default_str();
  sub->add_option("--leaf", c.leaf, "equal | distinct | comma-separated outcomes")
      ->capture_default_str();
  sub->add_option("--instance", c.instance, "computational | bell | haar")->capture_default_str();
  add_common(sub, c.common);
}

std::vector<std::uint32_t> parse_leaf(const std::string& s, int t, std::size_t d) {
  std::vector<std::uint32_t> leaf(t, 0);
  if (s == "equal") return leaf;
  if (s == "distinct") {
    if (static_cast<std::size_t>(t) > d) throw UsageError("distinct leaf needs T <= d");
    std::iota(leaf.begin(), leaf.end(), 0u);
    return leaf;
  }
  leaf.clear();
  for (const auto& part : split(s, ',')) leaf.push_back(static_cast<std::uint32_t>(std::stoul(part)));
  if (static_cast<int>(leaf.size()) != t) throw UsageError("--leaf must have T entries");
  return leaf;
}

CheckReport single_check(const CheckArgs& c, std::uint64_t seed) {
  Rng rng(seed, stream_id(StreamTag::kTrial, 0));
  const std::string& nm = c.name;
  if (nm == "haar") return check_haar_moment(c.d, c.t, c.samples, rng);
  if (nm == "chiribella" || nm == "mp" || nm == "mp-displayed") {
    std::size_t da = 1;
    for (int i = 0; i < c.a; ++i) da *= c.d;
    const Matrix input = random_mixed_state(da, std::min<std::size_t>(da, 4), rng).matrix();
    if (nm == "chiribella") return check_chiribella(c.d, c.a, c.b, input);
    return check_mp_bound(c.d, c.a, c.b, input,
                          nm == "mp" ? MpBoundForm::kProofCorrected : MpBoundForm::kDisplayed);
  }
  if (nm == "perm") {
    const int xi = static_cast<int>(c.x);
    std::size_t dx = 1, dy = 1;
    for (int i = 0; i < xi; ++i) dx *= c.d;
    for (int i = 0; i < c.y; ++i) dy *= c.d;
    const Matrix rx = random_mixed_state(dx, std::min<std::size_t>(dx, 4), rng).matrix();
    const Matrix ry = random_mixed_state(dy, std::min<std::size_t>(dy, 4), rng).matrix();
    return check_perm_inequality(rx, ry, xi, c.y, c.d);
  }
  if (nm == "likelihood") {
    return check_likelihood_ratio(c.d, c.de, c.big_t, parse_leaf(c.leaf, c.big_t, c.d), c.samples,
                                  rng);
  }
  if (nm == "likelihood-norm") return check_likelihood_normalization(c.d, c.de, c.big_t);
  if (nm == "stirling") return check_stirling_identity(c.t, c.x);
  if (nm == "collision") return check_collision_moments(c.d, c.big_t, c.samples, rng);
  if (nm == "povm") {
    PovmInstance inst;
    if (c.instance == "computational") {
      inst = PovmInstance::kComputational;
    } else if (c.instance == "bell") {
      inst = PovmInstance::kBellPairs;
    } else if (c.instance == "haar") {
      inst = PovmInstance::kHaarBasis;
    } else {
      throw UsageError("unknown --instance '" + c.instance + "'");
    }
    return check_povm_swap_bound(inst, c.n, c.k, seed);
  }
  if (nm == "induced") return check_induced_moments(c.n, c.de, c.samples, rng);
  throw UsageError("unknown check '" + nm + "'");
}

int cmd_check(CheckArgs& c, std::ostream& out, std::ostream& err) {
  if (c.suite.empty() == c.name.empty()) throw UsageError("give exactly one of --suite or --name");
  const std::uint64_t seed = resolve_seed(c.common.seed, err);
  Sink sink(out, c.common.out_path, c.common.append);
  bool header = sink.header();
  std::size_t total = 0, passed = 0;
  bool exact_ok = true;
  auto emit = [&](const std::vector<CheckReport>& rows, std::uint64_t s) {
    harness::write_check_reports(sink.stream(), rows, s, header);
    header = false;
    for (const auto& r : rows) {
      ++total;
      passed += r.passed ? 1 : 0;
    }
  };

  if (!c.name.empty()) {
    const CheckReport r = single_check(c, seed);
    emit({r}, seed);
    return r.passed ? kOk : kNumeric;
  }
  if (c.suite != "exact" && c.suite != "mc" && c.suite != "all") {
    throw UsageError("--suite must be exact, mc or all");
  }
  if (c.suite == "exact" || c.suite == "all") {
    const auto rows = exact_suite(seed);
    emit(rows, seed);
    exact_ok = std::all_of(rows.begin(), rows.end(), [](const CheckReport& r) { return r.passed; });
  }
  std::size_t mc_total = 0, mc_passed = 0;
  if (c.suite == "mc" || c.suite == "all") {
    if (c.seeds == 0) throw UsageError("--seeds must be >= 1");
    for (std::uint64_t i = 0; i < c.seeds; ++i) {
      const auto rows = mc_suite(seed + i);
      emit(rows, seed + i);
      for (const auto& r : rows) {
        ++mc_total;
        mc_passed += r.passed ? 1 : 0;
      }
    }
  }
  err << "checks passed: " << passed << "/" << total << "\n";
  const bool mc_ok = mc_total == 0 || static_cast<double>(mc_passed) >= 0.95 * mc_total;
  return exact_ok && mc_ok ? kOk : kNumeric;
}

// ---- distinguish ------------------------------------------------------------------

struct DistinguishArgs {
  Common common;
  harness::DistinguishOptions opts;
  std::string mode = "purity";
  std::string truth = "coin";
};

void setup_distinguish(CLI::App* sub, DistinguishArgs& a) {
  auto& o = a.opts;
  sub->add_option("--mode", a.mode, "purity | oracle | dipe1 | dipe2")->capture_default_str();
  sub->add_option("--truth", a.truth, "coin | null | alt")->capture_default_str();
  sub->add_option("--n", o.n, "Qubits")->capture_default_str();
  sub->add_option("--k", o.k, "Channel width for the purity estimate")->capture_default_str();
  sub->add_option("--epsilon", o.epsilon, "Ensemble parameter / accuracy")->capture_default_str();
  sub->add_option("--trials", o.trials, "Number of trials")->capture_default_str();
  sub->add_option("--N-b", o.num_batches, "Batches per trial (overrides the budget)");
  sub->add_option("--m", o.copies_per_batch, "Copies per batch (overrides the budget)");
  sub->add_option("--N-k", o.fk_copies, "f_k phase copies (overrides the budget)");
  sub->add_option("--calibration", o.calibration, "Budget constant c")->capture_default_str();
  sub->add_option("--base-state", o.base_state, "Spectrum source for dipe1")
      ->capture_default_str();
  sub->add_option("--rank", o.rank, "Mixture rank r for dipe2")->capture_default_str();
  add_common(sub, a.common);
}

int cmd_distinguish(DistinguishArgs& a, std::ostream& out, std::ostream& err) {
  auto& o = a.opts;
  o.seed = resolve_seed(a.common.seed, err);
  o.mode = harness::parse_distinguish_mode(a.mode);
  o.truth = harness::parse_truth(a.truth);
  const auto res = harness::run_distinguish(o);
  Sink sink(out, a.common.out_path, a.common.append);
  harness::write_distinguish(sink.stream(), {res}, sink.header());
  return kOk;
}

// ---- netsim -----------------------------------------------------------------------

struct NetArgs {
  Common common;
  std::string endpoint = "127.0.0.1:0";
  std::string protocol = "alg2";
  int n = 2;
  int k = 1;
  double epsilon = 0.1;
  double calibration = kDefaultCalibration;
  std::optional<std::uint64_t> num_batches;
  std::optional<std::uint64_t> copies_per_batch;
  std::optional<std::uint64_t> fk_copies;
  std::string state_a = "haar";
  std::string state_b = "same";
  std::uint64_t timeout_ms = 30000;
  std::string record_path;
  std::string port_file;
  std::string run_id = "net-0";
};

void setup_net(CLI::App* sub, NetArgs& a, bool alice) {
  if (alice) {
    sub->add_option("--connect", a.endpoint, "Bob's host:port")->required();
    sub->add_option("--protocol", a.protocol, "alg1 | alg2")->capture_default_str();
    sub->add_option("--k", a.k, "Channel width")->capture_default_str();
    sub->add_option("--epsilon", a.epsilon, "Accuracy for the default budget")
        ->capture_default_str();
    sub->add_option("--calibration", a.calibration, "Budget constant c")->capture_default_str();
    sub->add_option("--N-b", a.num_batches, "Batches");
    sub->add_option("--m", a.copies_per_batch, "Copies per batch");
    sub->add_option("--N-k", a.fk_copies, "f_k phase copies");
  } else {
    sub->add_option("--listen", a.endpoint, "host:port to listen on (port 0 = ephemeral)")
        ->capture_default_str();
    sub->add_option("--record", a.record_path, "Local FK_SAMPLE/RESULT record file");
    sub->add_option("--port-file", a.port_file, "Write the bound port here once listening");
    sub->add_option("--run-id", a.run_id, "Run identifier")->capture_default_str();
  }
  sub->add_option("--n", a.n, "Qubits")->capture_default_str();
  sub->add_option("--state-a", a.state_a, "Alice's state source")->capture_default_str();
  sub->add_option("--state-b", a.state_b, "Bob's state source, or 'same'")->capture_default_str();
  sub->add_option("--timeout-ms", a.timeout_ms, "Blocking I/O timeout")->capture_default_str();
  add_common(sub, a.common);
}

int cmd_alice(NetArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(a.common.seed, err);
  harness::EstimateOptions eo;
  eo.protocol = a.protocol;
  if (a.protocol != "alg1" && a.protocol != "alg2") throw UsageError("--protocol must be alg1 or alg2");
  eo.n = a.n;
  eo.k = a.k;
  eo.epsilon = a.epsilon;
  eo.calibration = a.calibration;
  eo.num_batches = a.num_batches;
  eo.copies_per_batch = a.copies_per_batch;
  eo.fk_copies = a.fk_copies;
  eo.seed = seed;
  ProtocolConfig config = harness::resolve_config(eo);
  if (config.protocol == Protocol::kAlg2 && config.fk_copies < 1) config.fk_copies = 1;
  const DensityMatrix rho = harness::draw_state_pair(a.state_a, a.state_b, a.n, seed, 0).first;
  netsim::NetOptions opts;
  opts.timeout = std::chrono::milliseconds(a.timeout_ms);
  const auto report = netsim::run_alice(config, rho, netsim::Endpoint::parse(a.endpoint), opts);
  Sink sink(out, a.common.out_path, a.common.append);
  harness::write_ledger_row(sink.stream(), "alice", config, report.ledger, std::nullopt,
                            sink.header());
  return report.ledger.bob_to_alice_frames_after_ack == 0 ? kOk : kIo;
}

int cmd_bob(NetArgs& a, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = resolve_seed(a.common.seed, err);
  const DensityMatrix sigma = harness::draw_state_pair(a.state_a, a.state_b, a.n, seed, 0).second;
  std::unique_ptr<std::ofstream> record;
  netsim::NetOptions opts;
  opts.timeout = std::chrono::milliseconds(a.timeout_ms);
  opts.adopt_hello = true;
  if (!a.record_path.empty()) {
    record = std::make_unique<std::ofstream>(a.record_path, std::ios::binary | std::ios::trunc);
    if (!*record) throw std::runtime_error("cannot open record file " + a.record_path);
    opts.record = record.get();
  }
  ProtocolConfig base;
  base.n = a.n;
  const auto report = netsim::run_bob(
      base, sigma, netsim::Endpoint::parse(a.endpoint), opts, [&](std::uint16_t port) {
        err << "dipesim: bob listening on port " << port << "\n";
        if (!a.port_file.empty()) {
          std::ofstream pf(a.port_file, std::ios::trunc);
          pf << port << "\n";
        }
      });
  Sink sink(out, a.common.out_path, a.common.append);
  harness::write_ledger_row(sink.stream(), a.run_id, report.config, report.ledger,
                            report.result.estimate, sink.header());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dipesim: distributed inner-product and purity estimation workbench"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  EstimateArgs est;
  SweepArgs sw;
  CheckArgs chk;
  DistinguishArgs dis;
  NetArgs alice, bob;

  auto* s_est = app.add_subcommand("estimate", "Run one protocol and write a RunRecord row");
  setup_estimate(s_est, est);
  auto* s_sw = app.add_subcommand("sweep", "Grid sweeps: variance vs k, error vs N, success rate");
  setup_sweep(s_sw, sw);
  auto* s_chk = app.add_subcommand("check", "Identity and moment checks");
  setup_check(s_chk, chk);
  auto* s_dis = app.add_subcommand("distinguish", "Purity-threshold and DIPE decision experiments");
  setup_distinguish(s_dis, dis);
  auto* s_net = app.add_subcommand("netsim", "Two-process runner over TCP");
  s_net->require_subcommand(1);
  auto* s_alice = s_net->add_subcommand("alice", "Connect to Bob and stream one run");
  setup_net(s_alice, alice, true);
  auto* s_bob = s_net->add_subcommand("bob", "Listen for Alice and compute the estimate");
  setup_net(s_bob, bob, false);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int rc = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (s_est->parsed()) {
      apply_config(s_est, est.common.config);
      return cmd_estimate(est, out, err);
    }
    if (s_sw->parsed()) {
      apply_config(s_sw, sw.common.config);
      return cmd_sweep(sw, out, err);
    }
    if (s_chk->parsed()) {
      apply_config(s_chk, chk.common.config);
      return cmd_check(chk, out, err);
    }
    if (s_dis->parsed()) {
      apply_config(s_dis, dis.common.config);
      return cmd_distinguish(dis, out, err);
    }
    if (s_alice->parsed()) {
      apply_config(s_alice, alice.common.config);
      return cmd_alice(alice, out, err);
    }
    if (s_bob->parsed()) {
      apply_config(s_bob, bob.common.config);
      return cmd_bob(bob, out, err);
    }
  } catch (const CLI::ParseError& e) {
    err << "dipesim: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantError& e) {
    err << "dipesim: numeric invariant failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const netsim::NetError& e) {
    err << "dipesim: " << e.what() << "\n";
    return e.code() == netsim::NetErrorCode::kInvalidState ? kNumeric : kIo;
  } catch (const std::invalid_argument& e) {
    err << "dipesim: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "dipesim: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "dipesim: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace dipesim::cli
