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

from wasmtaint.decoder.decoder import decode_module
from wasmtaint.exception import TrapException, WasmTaintException
from wasmtaint.runtime.instance import DEFAULT_MAX_CALL_DEPTH, instantiate
from wasmtaint.taint.shadow import memory_load_taint

logger = logging.getLogger(__name__)


@dataclass
class FixtureResult:
    name: str
    passed: bool
    diagnostic: str = ""
    expected_unsound: bool = False

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        line = "{} {}".format(status, self.name)
        if self.expected_unsound:
            line += " (expected unsound)"
        if self.diagnostic:
            line += ": " + self.diagnostic
        return line


@dataclass
class CorpusSummary:
    results: List[FixtureResult] = field(default_factory=list)

    @property
    def total(self):
        return len(self.results)

    @property
    def passed(self):
        return sum(1 for result in self.results if result.passed)

    @property
    def failures(self):
        return [result for result in self.results if not result.passed]

    @property
    def ok(self):
        return not self.failures

    def to_text(self):
        lines = [str(result) for result in self.results]
        lines.append("{}/{} fixtures passed".format(self.passed, self.total))
        return "\n".join(lines)


def _fail(fixture, diagnostic):
    return FixtureResult(fixture.name, False, diagnostic, fixture.expected_unsound)


def _format(values):
    return "[{}]".format(", ".join(value.literal() for value in values))


def run_fixture(fixture, max_call_depth=DEFAULT_MAX_CALL_DEPTH):
    """
    Execute one fixture and compare everything it expects. Never raises for
    a fixture failure; the diagnostic names the first mismatch.
    """
    try:
        with open(fixture.module, 'rb') as module_file:
            data = module_file.read()
    except OSError as e:
        return _fail(fixture, "cannot read {}: {}".format(fixture.module, e))

    try:
        module = decode_module(data)
        instance = instantiate(module, max_call_depth=fixture.max_depth or max_call_depth)
    except TrapException as e:
        return _fail(fixture, "instantiation trapped: {}".format(e))
    except WasmTaintException as e:
        return _fail(fixture, "decode failed: {}".format(e.reason))

    try:
        results, report = instance.invoke(fixture.invoke, fixture.arguments())
    except TrapException as e:
        if fixture.trap is None:
            return _fail(fixture, "unexpected trap: {}".format(e))
        if e.reason != fixture.trap:
            return _fail(fixture, "expected trap '{}', got '{}'".format(fixture.trap, e.reason))
        return _check_memory(fixture, instance)
    except WasmTaintException as e:
        return _fail(fixture, "invocation failed: {}".format(e.reason))

    if fixture.trap is not None:
        return _fail(fixture, "expected trap '{}', got results {}".format(fixture.trap, _format(results)))

    expected = fixture.expected_results()
    if [(v.vtype, v.bits) for v in results] != [(v.vtype, v.bits) for v in expected]:
        return _fail(fixture, "expected results {}, got {}".format(_format(expected), _format(results)))
    for i, (value, label) in enumerate(zip(results, fixture.result_taint)):
        if value.taint != label:
            return _fail(fixture, "result{} taint: expected {!r}, got {!r}".format(i, label, value.taint))

    return _check_memory(fixture, instance)


def _check_memory(fixture, instance):
    memory = instance.memory
    for check in fixture.memory:
        if check.addr + check.width > len(memory):
            return _fail(fixture, "memory check mem[{}..{}] is out of bounds".format(
                check.addr, check.addr + check.width - 1))
        label = memory_load_taint(memory, check.addr, check.width)
        if label != check.taint:
            return _fail(fixture, "mem[{}..{}] taint: expected {!r}, got {!r}".format(
                check.addr, check.addr + check.width - 1, check.taint, label))
    return FixtureResult(fixture.name, True, expected_unsound=fixture.expected_unsound)


def run_corpus(manifest, max_call_depth=DEFAULT_MAX_CALL_DEPTH):
    """
    Run every fixture of ``manifest`` in manifest order, one instance each.

    :return: CorpusSummary; its ``to_text`` is identical across runs
    """
    summary = CorpusSummary()
    for fixture in manifest.fixtures:
        result = run_fixture(fixture, max_call_depth)
        if result.passed:
            logger.info(str(result))
        else:
            logger.warning(str(result))
        summary.results.append(result)
    logger.info("{}/{} fixtures passed".format(summary.passed, summary.total))
    return summary
