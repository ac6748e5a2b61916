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

import pandas as pd
import pytest

from wasmtaint.exception import ManifestException
from wasmtaint.harness.bench import CSV_COLUMNS, read_bench_csv, write_bench_csv
from wasmtaint.harness.scaling import check_constant_transfer, check_scaling, fit_linear

SIZES = [1000 * k for k in range(10)]


def bench_frame(tainted_ms, untainted_ms, shadow=lambda n: 0, sizes=SIZES, case='loop', instructions=None):
    rows = []
    for n in sizes:
        rows.append({'case': case, 'n': n, 'mode': 'tainted', 'median_ms': tainted_ms(n),
                     'shadow_labels': shadow(n)})
        rows.append({'case': case, 'n': n, 'mode': 'untainted', 'median_ms': untainted_ms(n), 'shadow_labels': 0})
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    if instructions is not None:
        frame['instructions'] = [instructions(n) for n in frame['n']]
    return frame


def cubic(n):
    return (n / 1000.0) ** 3


def test_fit_linear():
    slope, intercept, r2 = fit_linear([1, 2, 3], [3, 5, 7])

    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(1.0)
    assert r2 == pytest.approx(1.0)


def test_fit_linear_constant():
    assert fit_linear([1, 2, 3], [4, 4, 4]) == (0.0, 4.0, 1.0)


def test_linear_case_passes():
    frame = bench_frame(lambda n: 0.02 * n + 1, lambda n: 0.01 * n + 1, shadow=lambda n: 4 * n)

    result = check_scaling(frame)

    assert result.passed, result.to_text()
    assert [fit.quantity for fit in result.fits] == ['median_ms', 'shadow_labels', 'median_ms']
    assert result.to_text().endswith("PASS")


def test_superlinear_timing_fails():
    result = check_scaling(bench_frame(cubic, lambda n: 0.0001 * n))

    assert not result.passed
    assert any("loop (tainted): timing r2" in failure for failure in result.failures)


def test_tainted_slope_below_untainted_fails():
    result = check_scaling(bench_frame(lambda n: 0.01 * n, lambda n: 0.02 * n))

    assert result.failures == [
        "loop: tainted slope 0.01 below untainted slope 0.02",
    ]


def test_nonlinear_shadow_fails():
    result = check_scaling(bench_frame(lambda n: 0.02 * n, lambda n: 0.01 * n, shadow=lambda n: int(cubic(n))))

    assert not result.passed
    assert "shadow label r2" in result.failures[0]


def test_too_few_sizes():
    result = check_scaling(bench_frame(lambda n: n, lambda n: n, sizes=[10, 20]))

    assert result.failures == [
        "loop (tainted): 2 sizes, at least 3 required",
        "loop (untainted): 2 sizes, at least 3 required",
    ]


def test_thresholds_are_configurable():
    frame = bench_frame(cubic, lambda n: 0.0001 * n)

    assert check_scaling(frame, timing_r2=0.5).passed


def test_empty_table():
    with pytest.raises(ManifestException):
        check_scaling(pd.DataFrame(columns=CSV_COLUMNS))


def test_reads_csv_path(tmp_path):
    path = str(tmp_path / 'bench.csv')
    write_bench_csv(bench_frame(lambda n: 0.02 * n, lambda n: 0.01 * n), path)

    assert check_scaling(path).passed


def test_constant_transfer():
    frame = bench_frame(lambda n: 0.002 * n + 0.5, lambda n: 0.001 * n, sizes=[1000, 10000, 100000],
                        instructions=lambda n: 10 * n + 50)

    passed, per_small, per_large = check_constant_transfer(frame, 'loop')

    assert passed
    assert per_large <= per_small


def test_constant_transfer_detects_growth():
    frame = bench_frame(lambda n: 1e-6 * n * n, lambda n: 0.001 * n, sizes=[1000, 10000, 100000],
                        instructions=lambda n: 10 * n)

    passed, _, _ = check_constant_transfer(frame, 'loop')

    assert not passed


def test_constant_transfer_needs_instructions():
    with pytest.raises(ManifestException):
        check_constant_transfer(bench_frame(lambda n: n, lambda n: n), 'loop')


class TestReadBenchCsv(object):
    def test_round_trip_columns(self, tmp_path):
        path = tmp_path / 'bench.csv'
        frame = bench_frame(lambda n: 0.5 * n, lambda n: 0.25 * n, instructions=lambda n: n)
        write_bench_csv(frame, str(path))

        assert path.read_text().splitlines()[0] == "case,n,mode,median_ms,shadow_labels"
        assert len(read_bench_csv(str(path))) == 2 * len(SIZES)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / 'bench.csv'
        path.write_text("case,size,mode,median_ms,shadow_labels\nloop,1,tainted,1.0,0\n")

        with pytest.raises(ManifestException):
            read_bench_csv(str(path))

    def test_unknown_mode(self, tmp_path):
        path = tmp_path / 'bench.csv'
        path.write_text("case,n,mode,median_ms,shadow_labels\nloop,1,traced,1.0,0\n")

        with pytest.raises(ManifestException) as raised:
            read_bench_csv(str(path))
        assert "traced" in raised.value.reason

    def test_malformed_value(self, tmp_path):
        path = tmp_path / 'bench.csv'
        path.write_text("case,n,mode,median_ms,shadow_labels\nloop,1,tainted,fast,0\n")

        with pytest.raises(ManifestException):
            read_bench_csv(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestException):
            read_bench_csv(str(tmp_path / 'absent.csv'))
