# Licensed to the Apache Software Foundation (ASF) under one or more
# contributor license agreements.  See the NOTICE file distributed with
# this work for additional information regarding copyright ownership.
# The ASF licenses this file to You under the Apache License, Version 2.0
# (the "License"); you may not use this file except in compliance with
# the License.  You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import logging
import sys
import time

import numpy as np
import pandas as pd
from tqdm import tqdm

from wasmtaint.decoder.decoder import decode_module
from wasmtaint.exception import ManifestException, WasmTaintException
from wasmtaint.runtime.instance import DEFAULT_MAX_CALL_DEPTH, instantiate

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 5

TAINTED = 'tainted'
UNTAINTED = 'untainted'
MODES = (TAINTED, UNTAINTED)

CSV_COLUMNS = ['case', 'n', 'mode', 'median_ms', 'shadow_labels']


def _load_module(case):
    try:
        with open(case.module, 'rb') as module_file:
            return decode_module(module_file.read())
    except OSError as e:
        raise ManifestException("bench case '{}': cannot read {}: {}".format(case.case, case.module, e))
    except WasmTaintException as e:
        raise ManifestException("bench case '{}': {}".format(case.case, e.reason))


def measure(module, case, n, mode, repeats, max_call_depth=DEFAULT_MAX_CALL_DEPTH):
    """
    Run ``case`` at size ``n`` ``repeats`` times on fresh instances.

    :return: tuple of (median wall time in ms, peak shadow labels, instructions per run)
    """
    propagate = mode == TAINTED
    timings = []
    shadow_labels = 0
    instructions = 0
    for _ in range(repeats):
        instance = instantiate(module, max_call_depth=max_call_depth, propagate=propagate)
        args = case.arguments(n, tainted=propagate)
        start = time.perf_counter()
        _, report = instance.invoke(case.invoke, args)
        timings.append((time.perf_counter() - start) * 1000.0)
        shadow_labels = max(shadow_labels, report.statistics['peak_shadow_labels'])
        instructions = report.statistics['instructions']
    return float(np.median(timings)), shadow_labels, instructions


def run_bench(manifest, repeats=None, max_call_depth=DEFAULT_MAX_CALL_DEPTH, progress=True):
    """
    Benchmark every case of ``manifest`` at each size in both modes,
    sequentially.

    :return: pandas DataFrame with the CSV columns plus ``instructions``
    """
    repeats = repeats or manifest.repeats or DEFAULT_REPEATS
    rows = []
    total = sum(len(case.sizes) for case in manifest.cases) * len(MODES)
    with tqdm(total=total, desc="bench", unit="run", file=sys.stderr, disable=not progress) as bar:
        for case in manifest.cases:
            module = _load_module(case)
            for n in case.sizes:
                for mode in MODES:
                    bar.set_postfix(case=case.case, n=n, mode=mode)
                    median_ms, shadow_labels, instructions = measure(module, case, n, mode, repeats,
                                                                     max_call_depth)
                    logger.info("{} n={} {}: {:.3f} ms, {} shadow labels, {} instructions".format(
                        case.case, n, mode, median_ms, shadow_labels, instructions))
                    rows.append({'case': case.case, 'n': n, 'mode': mode, 'median_ms': median_ms,
                                 'shadow_labels': shadow_labels, 'instructions': instructions})
                    bar.update(1)
    return pd.DataFrame(rows, columns=CSV_COLUMNS + ['instructions'])


def write_bench_csv(frame, path):
    frame.to_csv(path, columns=CSV_COLUMNS, index=False, float_format='%.6f')


def read_bench_csv(path):
    """Read a bench CSV, checking the header and column types."""
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise ManifestException("Cannot read bench CSV {}: {}".format(path, e))
    if list(frame.columns[:len(CSV_COLUMNS)]) != CSV_COLUMNS:
        raise ManifestException("Bench CSV {} must start with columns {}".format(path, ",".join(CSV_COLUMNS)))
    try:
        frame['n'] = frame['n'].astype(np.int64)
        frame['median_ms'] = frame['median_ms'].astype(np.float64)
        frame['shadow_labels'] = frame['shadow_labels'].astype(np.int64)
    except (TypeError, ValueError) as e:
        raise ManifestException("Bench CSV {} has a malformed value: {}".format(path, e))
    unknown = sorted(set(frame['mode']) - set(MODES))
    if unknown:
        raise ManifestException("Bench CSV {} has unknown modes: {}".format(path, ", ".join(map(str, unknown))))
    return frame
