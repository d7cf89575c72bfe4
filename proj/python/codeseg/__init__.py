# Copyright 2026 The codeseg Authors. All Rights Reserved.
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
"""Learned logical segmentation of source code."""

from ._codeseg import (
    CodesegError,
    Model,
    baseline_accuracy,
    build_block,
    init_model,
    load_corpus,
    load_model,
    normalize_newlines,
    run_cli,
    sample_counts,
    strip_annotations,
)

__all__ = [
    "CodesegError",
    "Model",
    "baseline_accuracy",
    "build_block",
    "init_model",
    "load_corpus",
    "load_model",
    "normalize_newlines",
    "run_cli",
    "sample_counts",
    "strip_annotations",
]

__version__ = "0.1.0"
