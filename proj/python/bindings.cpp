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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dipesim/cli.hpp"
#include "dipesim/ensembles.hpp"
#include "dipesim/harness.hpp"
#include "dipesim/identities.hpp"
#include "dipesim/oracles.hpp"
#include "dipesim/protocols.hpp"

namespace py = pybind11;
using namespace dipesim;

namespace {

// States cross the boundary as complex numpy arrays and are validated on entry.
DensityMatrix dm(const Matrix& m) { return DensityMatrix(m); }

Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error ? py::cast(*e.std_error) : py::none();
  d["samples"] = e.samples;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distributed inner-product and purity estimation simulator";

  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);

  // ---- states ----
  m.def("haar_unitary", [](std::size_t d, std::uint64_t seed, std::uint64_t stream) {
    Rng rng = make_rng(seed, stream);
    return haar_unitary(d, rng).matrix();
  }, py::arg("d"), py::arg("seed"), py::arg("stream") = 0);
  m.def("haar_state", [](std::size_t d, std::uint64_t seed, std::uint64_t stream) {
    Rng rng = make_rng(seed, stream);
    return haar_state(d, rng).matrix();
  }, py::arg("d"), py::arg("seed"), py::arg("stream") = 0);
  m.def("induced_state", [](int n, std::size_t d_e, std::uint64_t seed, std::uint64_t stream) {
    Rng rng = make_rng(seed, stream);
    return induced_state(InducedStateParams{n, d_e}, rng).matrix();
  }, py::arg("n"), py::arg("d_e"), py::arg("seed"), py::arg("stream") = 0);
  m.def("random_mixed_state", [](std::size_t d, std::size_t rank, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    return random_mixed_state(d, rank, rng).matrix();
  }, py::arg("d"), py::arg("rank"), py::arg("seed"));
  m.def("state_pair", [](const std::string& a, const std::string& b, int n, std::uint64_t seed,
                         std::uint64_t index) {
    auto [rho, sigma] = harness::draw_state_pair(a, b, n, seed, index);
    return py::make_tuple(rho.matrix(), sigma.matrix());
  }, py::arg("state_a"), py::arg("state_b"), py::arg("n"), py::arg("seed"), py::arg("index") = 0);
  m.def("validate_state", [](const Matrix& x) { dm(x).validate_strict(); });

  // ---- oracles ----
  m.def("inner_product", [](const Matrix& a, const Matrix& b) { return inner_product(dm(a), dm(b)); });
  m.def("purity", [](const Matrix& a) { return purity(dm(a)); });
  m.def("partial_ip", [](const Matrix& a, const Matrix& b, int k) { return partial_ip(dm(a), dm(b), k); });
  m.def("suffix_ip", [](const Matrix& a, const Matrix& b, int k) { return suffix_ip(dm(a), dm(b), k); });
  m.def("trace_distance", [](const Matrix& a, const Matrix& b) { return trace_distance(dm(a), dm(b)); });
  m.def("fidelity", [](const Matrix& a, const Matrix& b) { return fidelity(dm(a), dm(b)); });
  m.def("alg2_single_copy_variance", [](const Matrix& a, const Matrix& b, int k) {
    return alg2_single_copy_variance(dm(a), dm(b), k);
  });
  m.def("partial_trace", [](const Matrix& x, std::vector<int> keep) { return partial_trace(x, keep); },
        py::arg("m"), py::arg("keep"));

  // ---- protocols ----
  py::enum_<Protocol>(m, "Protocol").value("ALG1", Protocol::kAlg1).value("ALG2", Protocol::kAlg2);

  py::class_<ProtocolConfig>(m, "ProtocolConfig")
      .def(py::init<>())
      .def_readwrite("protocol", &ProtocolConfig::protocol)
      .def_readwrite("n", &ProtocolConfig::n)
      .def_readwrite("k", &ProtocolConfig::k)
      .def_readwrite("epsilon", &ProtocolConfig::epsilon)
      .def_readwrite("num_batches", &ProtocolConfig::num_batches)
      .def_readwrite("copies_per_batch", &ProtocolConfig::copies_per_batch)
      .def_readwrite("fk_copies", &ProtocolConfig::fk_copies)
      .def_readwrite("master_seed", &ProtocolConfig::master_seed)
      .def_readwrite("record_transcript", &ProtocolConfig::record_transcript)
      .def("validate", &ProtocolConfig::validate)
      .def("__repr__", [](const ProtocolConfig& c) {
        std::ostringstream o;
        o << "ProtocolConfig(" << to_string(c.protocol) << ", n=" << c.n << ", k=" << c.k
          << ", N_b=" << c.num_batches << ", m=" << c.copies_per_batch << ", N_k=" << c.fk_copies
          << ", seed=" << c.master_seed << ")";
        return o.str();
      });

  m.def("choose_params", &choose_params, py::arg("n"), py::arg("k"), py::arg("epsilon"),
        py::arg("calibration") = kDefaultCalibration, py::arg("master_seed") = 0);

  m.def("run_protocol", [](const Matrix& rho, const Matrix& sigma, const ProtocolConfig& c) {
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run_protocol(dm(rho), dm(sigma), c);
    }
    py::dict d = estimate_dict(r.estimate);
    d["batch_values"] = r.batch_values;
    d["fk"] = r.fk ? py::object(estimate_dict(*r.fk)) : py::none();
    py::list batches;
    for (const auto& b : r.transcript.batches) {
      py::dict bd;
      bd["batch"] = b.batch;
      bd["unitary_stream"] = b.unitary_stream;
      bd["x"] = b.x;
      bd["y"] = b.y;
      bd["z"] = b.z;
      batches.append(bd);
    }
    d["transcript"] = batches;
    d["fk_outcomes"] = r.transcript.fk_outcomes;
    return d;
  }, py::arg("rho"), py::arg("sigma"), py::arg("config"));

  m.def("purity_estimate", [](const Matrix& rho, const ProtocolConfig& c) {
    RunResult r;
    {
      py::gil_scoped_release release;
      r = purity_estimate(dm(rho), c);
    }
    return estimate_dict(r.estimate);
  }, py::arg("rho"), py::arg("config"));

  // ---- identities ----
  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("name", &CheckReport::name)
      .def_readonly("params", &CheckReport::params)
      .def_readonly("residual", &CheckReport::residual)
      .def_readonly("threshold", &CheckReport::threshold)
      .def_readonly("passed", &CheckReport::passed)
      .def_readonly("samples", &CheckReport::samples)
      .def("__repr__", [](const CheckReport& r) {
        return "CheckReport(" + r.name + " " + r.params + ", residual=" + std::to_string(r.residual) +
               ", passed=" + (r.passed ? "True" : "False") + ")";
      });

  py::enum_<MpBoundForm>(m, "MpBoundForm")
      .value("PROOF_CORRECTED", MpBoundForm::kProofCorrected)
      .value("DISPLAYED", MpBoundForm::kDisplayed);

  m.def("exact_suite", &exact_suite, py::arg("seed") = 2026,
        py::call_guard<py::gil_scoped_release>());
  m.def("mc_suite", &mc_suite, py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def("check_chiribella", &check_chiribella, py::arg("d"), py::arg("a"), py::arg("b"), py::arg("input"));
  m.def("check_mp_bound", &check_mp_bound, py::arg("d"), py::arg("a"), py::arg("b"), py::arg("input"),
        py::arg("form") = MpBoundForm::kProofCorrected);
  m.def("check_stirling_identity", &check_stirling_identity, py::arg("t"), py::arg("x"));
  m.def("likelihood_ratio", &likelihood_ratio, py::arg("d"), py::arg("eps"), py::arg("leaf"));
  m.def("induced_purity_mean", &induced_purity_mean, py::arg("n"), py::arg("eps"));
  m.def("induced_purity_variance", &induced_purity_variance, py::arg("n"), py::arg("eps"));
  m.def("haar_moment", &haar_moment, py::arg("t"), py::arg("d"));

  // ---- command line ----
  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the dipesim command line in-process; returns (exit_code, stdout, stderr).");
}
