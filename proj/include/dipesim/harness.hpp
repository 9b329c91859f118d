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

#pragma once

// Experiment drivers behind the command-line tool: state sources, run
// records, sweeps, distinguishing experiments and CSV output.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dipesim/identities.hpp"
#include "dipesim/linalg.hpp"
#include "dipesim/netsim.hpp"
#include "dipesim/protocols.hpp"
#include "dipesim/rng.hpp"

namespace dipesim::harness {

// ---- CSV ----------------------------------------------------------------------

// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are
// wrapped in quotes with inner quotes doubled.
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);
// Shortest round-trip representation ("%.17g" style, trimmed).
std::string fmt_double(double v);
std::string fmt_optional(const std::optional<double>& v);

// ---- State sources ------------------------------------------------------------

// haar | induced:<dE> | mixture:<r> | file:<path> | mixed | pure-basis[:<i>] | same
struct StateSpec {
  enum class Kind { kHaar, kInduced, kMixture, kFile, kMixed, kPureBasis, kSame };
  Kind kind = Kind::kHaar;
  std::uint64_t param = 0;
  std::string path;

  static StateSpec parse(const std::string& text);
  std::string to_string() const;
};

// Draws a state on n qubits. `same` is not resolvable here (throws).
// JSON files hold {"dim": d, "re": [[...]], "im": [[...]]} with im optional.
DensityMatrix make_state(const StateSpec& spec, int n, Rng& rng);
DensityMatrix load_state_file(const std::string& path);

// The (rho, sigma) pair used by a run: rho from spec_a, sigma from spec_b
// ("same" aliases rho). Each side has its own stream, so a process that only
// needs one of them draws it identically.
std::pair<DensityMatrix, DensityMatrix> draw_state_pair(const std::string& spec_a,
                                                        const std::string& spec_b, int n,
                                                        std::uint64_t seed, std::uint64_t index);

// Sequential per-purpose seeds derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index);
// 64 bits from the OS entropy source.
std::uint64_t entropy_seed();

// ---- Config files -------------------------------------------------------------

// key=value lines, '#' comments, blank lines ignored. Throws on malformed
// lines.
std::map<std::string, std::string> read_config_file(const std::string& path);

// ---- Run records --------------------------------------------------------------

struct RunRecord {
  std::string run_id;
  std::string protocol;  // alg1 | alg2 | purity | swap
  int n = 0;
  int k = 0;
  double epsilon = 0.0;
  std::uint64_t num_batches = 0;
  std::uint64_t copies_per_batch = 0;
  std::uint64_t fk_copies = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  std::optional<double> std_error;
  double exact = 0.0;
  double abs_error = 0.0;
  double wall_ms = 0.0;
};

const std::vector<std::string>& run_record_columns();
std::vector<std::string> to_fields(const RunRecord& r);
void write_run_records(std::ostream& out, const std::vector<RunRecord>& rows, bool header = true);

const std::vector<std::string>& check_report_columns();
void write_check_reports(std::ostream& out, const std::vector<CheckReport>& rows,
                         std::uint64_t seed, bool header = true);

// ---- estimate -----------------------------------------------------------------

struct EstimateOptions {
  std::string protocol = "auto";  // auto | alg1 | alg2 | purity | swap
  int n = 2;
  int k = 0;
  double epsilon = 0.1;
  double calibration = kDefaultCalibration;
  std::optional<std::uint64_t> num_batches;
  std::optional<std::uint64_t> copies_per_batch;
  std::optional<std::uint64_t> fk_copies;
  std::string state_a = "haar";
  std::string state_b = "same";
  std::uint64_t seed = 0;
  std::string run_id = "run-0";
};

// The budget formulas of choose_params restricted to one protocol.
ProtocolConfig budget_for(Protocol protocol, int n, int k, double epsilon, double calibration,
                          std::uint64_t seed);

// Resolves the protocol configuration (budget defaults plus overrides).
ProtocolConfig resolve_config(const EstimateOptions& opts);
RunRecord run_estimate(const EstimateOptions& opts);

// ---- sweep --------------------------------------------------------------------

enum class SweepMode { kVariance, kError, kSuccess };
SweepMode parse_sweep_mode(const std::string& s);
std::string to_string(SweepMode m);

struct SweepOptions {
  SweepMode mode = SweepMode::kVariance;
  std::vector<int> ns{6};
  std::vector<int> ks{0, 2, 4, 6};
  std::vector<double> epsilons{0.1};
  std::vector<std::uint64_t> budgets{1000};  // total copies N (error mode)
  std::string protocol = "alg2";            // error mode
  std::uint64_t copies_per_batch = 1;        // variance mode m; alg1 m in error mode
  std::uint64_t reps = 20000;                // batches (variance) or repetitions
  double calibration = kDefaultCalibration;
  std::string state_a = "induced:2";
  std::string state_b = "same";
  std::uint64_t seed = 0;
  unsigned workers = 0;                      // 0 = hardware concurrency
};

struct SweepRow {
  SweepMode mode = SweepMode::kVariance;
  std::string protocol;
  int n = 0;
  int k = 0;
  double epsilon = 0.0;
  std::uint64_t total_copies = 0;
  std::uint64_t num_batches = 0;
  std::uint64_t copies_per_batch = 0;
  std::uint64_t fk_copies = 0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  double exact = 0.0;
  std::optional<double> var_w;
  std::optional<double> var_w_exact;
  std::optional<double> mean_abs_error;
  std::optional<double> success_rate;
};

const std::vector<std::string>& sweep_columns();
void write_sweep_rows(std::ostream& out, const std::vector<SweepRow>& rows, bool header = true);

// Runs every grid cell (worker pool) and returns rows in grid order.
std::vector<SweepRow> run_sweep(const SweepOptions& opts);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---- distinguish ----------------------------------------------------------------

enum class DistinguishMode { kPurity, kOracle, kDipe1, kDipe2 };
DistinguishMode parse_distinguish_mode(const std::string& s);
std::string to_string(DistinguishMode m);

// Which hypothesis holds in each trial. kNull is the maximally mixed state
// (purity modes) or independent states (DIPE modes); kAlt is the induced
// ensemble or identical states.
enum class Truth { kCoin, kNull, kAlt };
// coin | null | alt, with aliases mixed = null and induced = same = alt.
Truth parse_truth(const std::string& s);

struct DistinguishOptions {
  DistinguishMode mode = DistinguishMode::kPurity;
  Truth truth = Truth::kCoin;
  int n = 3;
  int k = 0;
  double epsilon = 0.5;
  std::uint64_t trials = 200;
  std::optional<std::uint64_t> num_batches;
  std::optional<std::uint64_t> copies_per_batch;
  std::optional<std::uint64_t> fk_copies;
  double calibration = kDefaultCalibration;
  std::string base_state = "induced:2";  // dipe1 spectrum source
  std::uint64_t rank = 1;                // dipe2 mixture rank
  std::uint64_t seed = 0;
};

struct DistinguishResult {
  DistinguishMode mode = DistinguishMode::kPurity;
  int n = 0;
  int k = 0;
  double epsilon = 0.0;
  double threshold = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t num_batches = 0;
  std::uint64_t copies_per_batch = 0;
  std::uint64_t fk_copies = 0;
  std::uint64_t seed = 0;
  double success_rate() const {
    return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  }
};

// Purity/oracle: output "maximally mixed" iff the purity estimate is below
// 2^{-n} + eps/3; the alternative is an induced state with d_E = 1/eps.
// DIPE I/II: Alice and Bob hold the same state or independent ones; decide
// "same" iff the Algorithm 1 estimate exceeds the midpoint between the
// expected same-state purity and 1/2^n.
DistinguishResult run_distinguish(const DistinguishOptions& opts);

const std::vector<std::string>& distinguish_columns();
void write_distinguish(std::ostream& out, const std::vector<DistinguishResult>& rows,
                       bool header = true);

// ---- netsim ledger --------------------------------------------------------------

const std::vector<std::string>& ledger_columns();
void write_ledger_row(std::ostream& out, const std::string& run_id, const ProtocolConfig& config,
                      const netsim::ChannelLedger& ledger,
                      const std::optional<Estimate>& estimate,
                      bool header = true);

}  // namespace dipesim::harness
