# Copyright 2026 The dipesim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import dipesim


def test_oracles_on_basic_states():
    d = 4
    mixed = np.eye(d, dtype=complex) / d
    assert dipesim.purity(mixed) == pytest.approx(1 / d)
    psi = dipesim.haar_state(d, seed=3)
    assert dipesim.inner_product(psi, psi) == pytest.approx(1.0)
    assert dipesim.inner_product(psi, mixed) == pytest.approx(1 / d)
    assert dipesim.partial_ip(psi, mixed, 0) == pytest.approx(1.0)
    assert dipesim.fidelity(psi, psi) == pytest.approx(1.0)
    assert dipesim.trace_distance(psi, psi) == pytest.approx(0.0, abs=1e-12)


def test_invalid_state_is_rejected():
    bad = np.array([[0.5, 0.3], [0.0, 0.5]], dtype=complex)
    with pytest.raises(ValueError):
        dipesim.purity(bad)


def test_samplers_are_seeded():
    u = dipesim.haar_unitary(4, seed=1)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    assert np.array_equal(u, dipesim.haar_unitary(4, seed=1))
    assert not np.array_equal(u, dipesim.haar_unitary(4, seed=2))
    rho = dipesim.induced_state(2, 2, seed=5)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho).min() > -1e-9


def test_partial_trace_matches_numpy():
    rho = dipesim.random_mixed_state(8, 3, seed=4)
    want = np.einsum("abcdbc->ad", rho.reshape(2, 2, 2, 2, 2, 2))
    assert np.allclose(dipesim.partial_trace(rho, [0]), want, atol=1e-14)


def test_alg2_run_is_unbiased_and_deterministic():
    rho, sigma = dipesim.state_pair("induced:2", "haar", 3, seed=7)
    cfg = dipesim.ProtocolConfig()
    cfg.protocol = dipesim.Protocol.ALG2
    cfg.n, cfg.k = 3, 1
    cfg.num_batches, cfg.copies_per_batch, cfg.fk_copies = 20000, 1, 20000
    cfg.master_seed = 11
    r = dipesim.run_protocol(rho, sigma, cfg)
    exact = dipesim.inner_product(rho, sigma)
    assert abs(r["value"] - exact) <= 3 * r["std_error"]
    assert r["samples"] == 40000
    assert len(r["transcript"]) == 20000
    assert dipesim.run_protocol(rho, sigma, cfg)["value"] == r["value"]


def test_single_copy_variance_matches_samples():
    rho, sigma = dipesim.state_pair("induced:2", "induced:2", 3, seed=8)
    cfg = dipesim.ProtocolConfig()
    cfg.n, cfg.k = 3, 1
    cfg.num_batches, cfg.fk_copies, cfg.master_seed = 20000, 1, 9
    cfg.record_transcript = False
    values = np.array(dipesim.run_protocol(rho, sigma, cfg)["batch_values"])
    assert values.var(ddof=1) == pytest.approx(
        dipesim.alg2_single_copy_variance(rho, sigma, 1), rel=0.1)


def test_choose_params_and_purity():
    c = dipesim.choose_params(8, 8, 0.1)
    assert c.protocol == dipesim.Protocol.ALG2
    assert c.num_batches == 800
    assert dipesim.choose_params(4, 0, 0.1).protocol == dipesim.Protocol.ALG1
    psi = dipesim.haar_state(8, seed=2)
    cfg = dipesim.ProtocolConfig()
    cfg.n, cfg.k, cfg.num_batches, cfg.fk_copies = 3, 3, 2000, 2000
    e = dipesim.purity_estimate(psi, cfg)
    assert e["value"] == pytest.approx(1.0)


def test_identities():
    assert dipesim.likelihood_ratio(4, 0.25, [0, 0]) == pytest.approx(1.17647, abs=1e-5)
    assert dipesim.induced_purity_mean(1, 0.5) == pytest.approx(0.8)
    zero = np.diag([1.0, 0.0]).astype(complex)
    assert dipesim.check_mp_bound(2, 1, 1, zero).passed
    assert not dipesim.check_mp_bound(2, 1, 1, zero, dipesim.MpBoundForm.DISPLAYED).passed
    assert dipesim.check_stirling_identity(4, 3.0).passed
    m2 = dipesim.haar_moment(2, 2)
    assert np.trace(m2).real == pytest.approx(1.0)


def test_cli_round_trip():
    code, out, err = dipesim.cli(["estimate", "--n", "2", "--epsilon", "0.5", "--seed", "1"])
    assert code == 0, err
    header, row = out.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert math.isclose(float(fields["abs_error"]),
                        abs(float(fields["estimate"]) - float(fields["exact"])), abs_tol=1e-12)
    assert dipesim.cli(["estimate", "--bogus"])[0] == 1
