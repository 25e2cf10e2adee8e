# Copyright 2026 The kblock Authors.
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
"""Python bindings for the k-block shuffle test harness."""

import pkgutil

# Lets an in-tree build (build/python/kblock/_core*.so) sit beside the sources.
__path__ = pkgutil.extend_path(__path__, __name__)

from kblock._core import (  # noqa: E402
    DEFAULT_SEED,
    UNSHUFFLABLE,
    ConfigError,
    Error,
    NgramModel,
    ProviderError,
    cohen_kappa,
    derive_seed,
    evaluate_external,
    evaluate_ngram,
    load_corpus,
    make_instance,
    segment,
    shuffle_blocks,
    tokenize,
)

__all__ = [
    "DEFAULT_SEED",
    "UNSHUFFLABLE",
    "ConfigError",
    "Error",
    "NgramModel",
    "ProviderError",
    "cohen_kappa",
    "derive_seed",
    "evaluate_external",
    "evaluate_ngram",
    "load_corpus",
    "make_instance",
    "segment",
    "shuffle_blocks",
    "tokenize",
]
