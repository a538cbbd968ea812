# Copyright 2026 The adforge Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the adforge attack-defense tree toolkit."""

import json
import os
from pathlib import Path
from typing import Optional

from . import _core
from ._core import Error, canonicalize, extract_dot_blocks, prompt_key, render_insert_prompt

__all__ = [
    "Error",
    "canonicalize",
    "compile_experiment",
    "default_catalog",
    "extract_dot_blocks",
    "prompt_key",
    "render_insert_prompt",
    "run_experiment",
    "score",
    "summary",
]


def default_catalog() -> str:
    """Catalog used when none is given: $ADFORGE_CATALOG, the bundled copy, then the source tree."""
    env = os.environ.get("ADFORGE_CATALOG")
    if env:
        return env
    bundled = Path(__file__).with_name("attack-catalog.json")
    if bundled.exists():
        return str(bundled)
    return str(Path(_core.default_data_dir()) / "attack-catalog.json")


def summary(dot: str) -> dict:
    return json.loads(_core.summary(dot))


def score(dot: str, catalog: Optional[str] = None, reference: Optional[str] = None) -> dict:
    """Score a DOT tree. `reference` is the text of a reference-order file."""
    return json.loads(_core.score(dot, catalog or default_catalog(), reference))


def compile_experiment(dot: str, goal: str, leaf: Optional[str] = None,
                       scenario: Optional[str] = None) -> dict:
    return json.loads(_core.compile_experiment(dot, goal, leaf, scenario))


def run_experiment(experiment, state: str, detector: Optional[str] = None, seed: int = 0) -> dict:
    if isinstance(experiment, dict):
        experiment = json.dumps(experiment)
    return json.loads(_core.run_experiment(experiment, state, detector, seed))
