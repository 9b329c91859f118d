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

"""Distributed inner-product and purity estimation simulator.

States are complex numpy arrays; they are checked for Hermiticity, unit
trace and positivity (within 1e-9) on every call.
"""

from ._core import (
    CheckReport,
    InvariantError,
    MpBoundForm,
    Protocol,
    ProtocolConfig,
    alg2_single_copy_variance,
    check_chiribella,
    check_mp_bound,
    check_stirling_identity,
    choose_params,
    cli,
    exact_suite,
    fidelity,
    haar_moment,
    haar_state,
    haar_unitary,
    induced_purity_mean,
    induced_purity_variance,
    induced_state,
    inner_product,
    likelihood_ratio,
    mc_suite,
    partial_ip,
    partial_trace,
    purity,
    purity_estimate,
    random_mixed_state,
    run_protocol,
    state_pair,
    suffix_ip,
    trace_distance,
    validate_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
