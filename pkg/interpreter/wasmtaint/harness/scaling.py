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
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.stats import linregress

from wasmtaint.exception import ManifestException
from wasmtaint.harness.bench import TAINTED, UNTAINTED, read_bench_csv

logger = logging.getLogger(__name__)

DEFAULT_TIMING_R2 = 0.95
DEFAULT_MEMORY_R2 = 0.99
DEFAULT_TRANSFER_RATIO = 2.0
MIN_SIZES = 3


@dataclass
class LinearFit:
    case: str
    quantity: str
    mode: str
    slope: float
    intercept: float
    r2: float

    def __str__(self):
        return "{} {} ({}): slope={:.6g} intercept={:.6g} r2={:.4f}".format(
            self.case, self.quantity, self.mode, self.slope, self.intercept, self.r2)


@dataclass
class ScalingResult:
    fits: List[LinearFit] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_text(self):
        lines = [str(fit) for fit in self.fits]
        lines.extend("FAIL " + failure for failure in self.failures)
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def fit_linear(n, y):
    """Least-squares line through (n, y); r2 is 1.0 for a constant y."""
    n = np.asarray(n, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.all(y == y[0]):
        return 0.0, float(y[0]), 1.0
    fit = linregress(n, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def check_scaling(frame, timing_r2=DEFAULT_TIMING_R2, memory_r2=DEFAULT_MEMORY_R2):
    """
    Check a bench table for linear growth. ``frame`` is a DataFrame with
    the bench CSV columns, or a path to a bench CSV.

    Per case: median_ms against n fits a line with R^2 >= ``timing_r2`` in
    both modes and the tainted slope is at least the untainted slope.
    Where the tainted shadow-label count varies with n it must fit a line
    with R^2 >= ``memory_r2``.
    """
    if isinstance(frame, str):
        frame = read_bench_csv(frame)
    result = ScalingResult()
    if frame.empty:
        raise ManifestException("Bench table has no rows")

    for case, rows in frame.groupby('case', sort=False):
        slopes = {}
        for mode in (TAINTED, UNTAINTED):
            measured = rows[rows['mode'] == mode].groupby('n', sort=True).median(numeric_only=True)
            if len(measured) < MIN_SIZES:
                result.failures.append("{} ({}): {} sizes, at least {} required".format(
                    case, mode, len(measured), MIN_SIZES))
                continue
            slope, intercept, r2 = fit_linear(measured.index.values, measured['median_ms'].values)
            result.fits.append(LinearFit(case, 'median_ms', mode, slope, intercept, r2))
            slopes[mode] = slope
            if r2 < timing_r2:
                result.failures.append("{} ({}): timing r2 {:.4f} < {}".format(case, mode, r2, timing_r2))

            if mode == TAINTED and measured['shadow_labels'].nunique() > 1:
                slope, intercept, r2 = fit_linear(measured.index.values, measured['shadow_labels'].values)
                result.fits.append(LinearFit(case, 'shadow_labels', mode, slope, intercept, r2))
                if r2 < memory_r2:
                    result.failures.append("{}: shadow label r2 {:.4f} < {}".format(case, r2, memory_r2))

        if len(slopes) == 2 and slopes[TAINTED] < slopes[UNTAINTED]:
            result.failures.append("{}: tainted slope {:.6g} below untainted slope {:.6g}".format(
                case, slopes[TAINTED], slopes[UNTAINTED]))

    for fit in result.fits:
        logger.info(str(fit))
    return result


def check_constant_transfer(frame, case, ratio=DEFAULT_TRANSFER_RATIO):
    """
    Per-instruction time in tainted mode at the largest size of ``case``
    must be within ``ratio`` times that at the smallest size. ``frame``
    must carry the ``instructions`` column produced by run_bench.

    :return: tuple of (passed, per-instruction ms at smallest n, at largest n)
    """
    if 'instructions' not in frame.columns:
        raise ManifestException("Bench table has no instruction counts")
    rows = frame[(frame['case'] == case) & (frame['mode'] == TAINTED)].sort_values('n')
    if len(rows) < 2:
        raise ManifestException("Bench case '{}' needs at least two tainted sizes".format(case))
    smallest, largest = rows.iloc[0], rows.iloc[-1]
    per_small = smallest['median_ms'] / max(int(smallest['instructions']), 1)
    per_large = largest['median_ms'] / max(int(largest['instructions']), 1)
    passed = per_large <= ratio * per_small
    logger.info("{}: {:.3g} ms/instruction at n={}, {:.3g} at n={}".format(
        case, per_small, smallest['n'], per_large, largest['n']))
    return passed, per_small, per_large
