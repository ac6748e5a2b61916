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

import glob
import json
import math
import os
import shutil

import pytest

from wasmtaint.decoder.decoder import decode_module
from wasmtaint.harness.bench import read_bench_csv, run_bench, write_bench_csv
from wasmtaint.harness.corpus import run_corpus, run_fixture
from wasmtaint.harness.manifest import CATEGORIES, load_bench_manifest, load_manifest
from wasmtaint.harness.scaling import check_constant_transfer, check_scaling
from wasmtaint.runtime.values import parse_literal

CORPUS_DIR = os.path.dirname(os.path.abspath(__file__))


def to_i32(value):
    value &= 0xFFFFFFFF
    return value - (1 << 32) if value >> 31 else value


def to_i64(value):
    value &= 0xFFFFFFFFFFFFFFFF
    return value - (1 << 64) if value >> 63 else value


def oracle_fact(n):
    return math.factorial(n)


def oracle_totient(n):
    return sum(1 for i in range(1, n + 1) if math.gcd(i, n) == 1)


def oracle_fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def oracle_mix(a, b):
    return a * 2 * 3 if b > 0 else a * 2


def oracle_lookup(idx):
    return [17, 4, 91, 23, 8, 56, 2, 71][idx & 7]


def oracle_memory_bytes(secret):
    memory = bytearray(16)
    memory[4:8] = (secret & 0xFFFFFFFF).to_bytes(4, 'little')
    return memory


def oracle_adjacent(secret):
    memory = oracle_memory_bytes(secret)
    return memory[3] + memory[8]


def oracle_overlap(secret):
    return to_i32(int.from_bytes(oracle_memory_bytes(secret)[6:10], 'little'))


def oracle_dispatch(sel, v):
    # C remainder truncates toward zero
    index = int(math.fmod(sel, 3))
    return [lambda x: x + 1, lambda x: x * 2, lambda x: -x][index](v)


def oracle_escape_while(y):
    x = 0
    while y < 42:
        x += 1
        y += 1
    return x


def oracle_escape_for(y):
    x = 5
    for _ in range(y, 10):
        x *= 2
    return x


def oracle_divide(a, b):
    return int(a / b)


ORACLES = {
    'fact': oracle_fact,
    'fact_rec': oracle_fact,
    'totient_rec': oracle_totient,
    'totient_iter': oracle_totient,
    'fib': oracle_fib,
    'mix': oracle_mix,
    'narrow_sum': lambda a, b: to_i32(a + b),
    'widen': lambda x: to_i64(x * 3000000000),
    'lookup': oracle_lookup,
    'adjacent': oracle_adjacent,
    'overlap': oracle_overlap,
    'dispatch': oracle_dispatch,
    'escape_while': oracle_escape_while,
    'escape_for': oracle_escape_for,
    'divide': oracle_divide,
    'depth': lambda n: n,
    'fill': lambda n: n,
    'loop': lambda n: max(n, 0),
}


@pytest.fixture(scope="module")
def corpus(corpus_manifest_path):
    return load_manifest(corpus_manifest_path)


def test_fixture(fixture_case):
    result = run_fixture(fixture_case)

    assert result.passed, result.diagnostic
    assert result.expected_unsound == fixture_case.expected_unsound


def test_expected_results_match_oracle(fixture_case):
    if fixture_case.results is None:
        pytest.skip("trap fixture")
    args = [value.signed for value in fixture_case.arguments()]
    expected = [value.signed for value in fixture_case.expected_results()]

    assert expected == [ORACLES[fixture_case.invoke](*args)]


def test_every_fixture_decodes():
    for path in sorted(glob.glob(os.path.join(CORPUS_DIR, 'bin', '*.wasm'))):
        with open(path, 'rb') as module_file:
            module = decode_module(module_file.read())
        assert module.functions, path


def test_every_category_covered(corpus):
    assert corpus.categories() == sorted(CATEGORIES)


def test_exactly_two_expected_unsound(corpus):
    unsound = [fixture for fixture in corpus.fixtures if fixture.expected_unsound]

    assert len(unsound) == 2
    assert {fixture.category for fixture in unsound} == {'escape'}
    assert all(not label for fixture in unsound for label in fixture.result_taint)


def test_optimization_pairs(corpus):
    names = {fixture.name for fixture in corpus.fixtures}
    for program in ('fact', 'fact_rec', 'fib', 'mix', 'totient_rec', 'totient_iter', 'narrow_sum', 'widen',
                    'adjacent', 'overlap', 'dispatch', 'fill', 'loop'):
        assert program + '_O0' in names
        assert program + '_O2' in names


def test_mixed_source_label(corpus):
    mix = next(fixture for fixture in corpus.fixtures if fixture.name == 'mix_O2')

    assert {source: level.name for source, level in mix.result_taint[0].items()} == \
        {0: 'DIRECT', 1: 'INDIRECT'}


def test_corpus_summary_is_deterministic(corpus):
    first = run_corpus(corpus)
    second = run_corpus(corpus)

    assert first.ok
    assert first.to_text() == second.to_text()
    assert first.to_text().splitlines()[-1] == "{0}/{0} fixtures passed".format(len(corpus))


def _write_manifest(tmp_path, fixtures):
    path = tmp_path / 'manifest.json'
    path.write_text(json.dumps({'fixtures': fixtures}))
    return str(path)


def test_corrupted_module_is_named(tmp_path):
    os.makedirs(str(tmp_path / 'bin'))
    shutil.copy(os.path.join(CORPUS_DIR, 'bin', 'fact_O0.wasm'), str(tmp_path / 'bin' / 'fact_O0.wasm'))
    with open(os.path.join(CORPUS_DIR, 'bin', 'fact_O2.wasm'), 'rb') as module_file:
        data = bytearray(module_file.read())
    data[8] = 0x7f
    (tmp_path / 'bin' / 'broken.wasm').write_bytes(bytes(data[:len(data) // 2]))

    fixture = {'category': 'loops', 'invoke': 'fact', 'args': ['i32:5'], 'taint': [0], 'results': ['i32:120'],
               'result_taint': [{'0': 'DIRECT'}]}
    manifest = load_manifest(_write_manifest(tmp_path, [
        dict(fixture, name='good', module='bin/fact_O0.wasm'),
        dict(fixture, name='broken', module='bin/broken.wasm'),
    ]))

    summary = run_corpus(manifest)

    assert summary.passed == 1
    assert [result.name for result in summary.failures] == ['broken']
    assert "FAIL broken" in summary.to_text()
    assert summary.to_text().endswith("1/2 fixtures passed")


def test_empty_manifest(tmp_path):
    summary = run_corpus(load_manifest(_write_manifest(tmp_path, [])))

    assert summary.ok
    assert summary.to_text() == "0/0 fixtures passed"


def test_wrong_taint_expectation_fails(tmp_path):
    shutil.copy(os.path.join(CORPUS_DIR, 'bin', 'mix_O0.wasm'), str(tmp_path / 'mix_O0.wasm'))
    manifest = load_manifest(_write_manifest(tmp_path, [
        {'name': 'mix', 'module': 'mix_O0.wasm', 'category': 'conditionals', 'invoke': 'mix',
         'args': ['i32:5', 'i32:1'], 'taint': [0, 1], 'results': ['i32:30'],
         'result_taint': [{'0': 'DIRECT', '1': 'DIRECT'}]},
    ]))

    result = run_fixture(manifest.fixtures[0])

    assert not result.passed
    assert "result0 taint" in result.diagnostic


@pytest.mark.integration
def test_bench_scaling(bench_manifest_path, bench_repeats, tmp_path):
    manifest = load_bench_manifest(bench_manifest_path)
    frame = run_bench(manifest, repeats=bench_repeats, progress=False)
    csv_path = str(tmp_path / 'bench.csv')
    write_bench_csv(frame, csv_path)

    assert len(frame) == 2 * sum(len(case.sizes) for case in manifest.cases)
    with open(csv_path) as csv_file:
        assert csv_file.readline().strip() == "case,n,mode,median_ms,shadow_labels"

    result = check_scaling(read_bench_csv(csv_path))
    assert result.passed, result.to_text()

    array = frame[(frame['case'] == 'array') & (frame['mode'] == 'tainted')]
    assert list(array['shadow_labels']) == [4 * n for n in array['n']]
    assert (frame[frame['mode'] == 'untainted']['shadow_labels'] == 0).all()

    passed, per_small, per_large = check_constant_transfer(frame, 'loop')
    assert passed, (per_small, per_large)


def test_bench_argument_templates(bench_manifest_path):
    manifest = load_bench_manifest(bench_manifest_path)
    loop = next(case for case in manifest.cases if case.case == 'loop')

    tainted = loop.arguments(1000)
    untainted = loop.arguments(1000, tainted=False)

    assert tainted == [parse_literal('i32:1000', tainted[0].taint)]
    assert tainted[0].taint
    assert not untainted[0].taint
