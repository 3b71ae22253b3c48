# Copyright 2026 The ftancilla Authors
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

"""Fault-tolerant distillation of stabilizer ancilla states."""

import json
from typing import Any, Dict, Union

from ftancilla._core import (
    LinearCode,
    binomial_point,
    binomial_tail,
    code,
    code_names,
    effective_rate,
    encoder,
    run_cli,
    slope_fit,
    wilson_ci,
)
from ftancilla import _core

__all__ = [
    "LinearCode",
    "binomial_point",
    "binomial_tail",
    "code",
    "code_names",
    "effective_rate",
    "encoder",
    "run_cli",
    "simulate",
    "single_fault_sweep",
    "slope_fit",
    "wilson_ci",
]

Config = Union[str, Dict[str, Any]]


def _config_text(config: Config) -> str:
    return config if isinstance(config, str) else json.dumps(config)


def simulate(config: Config, trials: int = 0, threads: int = 0, base_dir: str = "") -> Dict[str, Any]:
    """Runs an experiment config (dict or JSON text); returns the results document."""
    return json.loads(_core.simulate(_config_text(config), trials, threads, base_dir))


def single_fault_sweep(config: Config, group: int = 0, base_dir: str = "") -> Dict[str, Any]:
    """Exhaustive single-CNOT-fault sweep over one round-1 group."""
    return _core.single_fault_sweep(_config_text(config), group, base_dir)
