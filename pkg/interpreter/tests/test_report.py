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

import json
import unittest

import numpy as np

from wasmtaint.runtime.memory import LinearMemory
from wasmtaint.runtime.values import i32, i64
from wasmtaint.taint.labels import TaintLabel, TaintLevel
from wasmtaint.taint.report import (ReportEncoder, ResultTaint, SourceBytes, TaintRegion, TaintReport, make_report,
                                    signed)
from wasmtaint.taint.shadow import memory_store_taint

D = TaintLevel.DIRECT
I = TaintLevel.INDIRECT


class FakeInstance(object):
    def __init__(self, sources, memory):
        self.taint_sources = sources
        self.memory = memory

    def statistics(self):
        return {'instructions': 12}


class TestReport(unittest.TestCase):
    def setUp(self):
        self.memory = LinearMemory(1)
        memory_store_taint(self.memory, 16, 4, TaintLabel({0: D}))
        memory_store_taint(self.memory, 20, 2, TaintLabel({0: I, 1: D}))
        self.instance = FakeInstance([0, 1], self.memory)

    def test_counts_and_regions(self):
        report = make_report(self.instance, [i32(-1, TaintLabel({1: I}))])

        self.assertEqual(6, report.tainted_bytes)
        self.assertEqual({0: SourceBytes(4, 2), 1: SourceBytes(2, 0)}, report.by_source)
        self.assertEqual([TaintRegion(16, 19, TaintLabel({0: D})), TaintRegion(20, 21, TaintLabel({0: I, 1: D}))],
                         report.regions)
        self.assertEqual([ResultTaint('i32', -1, TaintLabel({1: I}))], report.results)
        self.assertEqual({'instructions': 12}, report.statistics)

    def test_json_schema(self):
        report = make_report(self.instance, [i64(-21000000000, TaintLabel({0: D}))])

        self.assertEqual({
            "sources": [0, 1],
            "results": [{"type": "i64", "value": "-21000000000", "taint": {"0": "DIRECT"}}],
            "memory": {
                "tainted_bytes": 6,
                "by_source": {"0": {"direct": 4, "indirect": 2}, "1": {"direct": 2, "indirect": 0}},
            },
        }, json.loads(report.to_json()))

    def test_json_round_trip(self):
        report = make_report(self.instance, [i32(7, TaintLabel({0: D, 1: I}))])

        self.assertEqual(report, TaintReport.from_json(report.to_json(indent=2)))

    def test_untainted_source_still_listed(self):
        report = make_report(FakeInstance([0, 3], LinearMemory(1)), [i32(1)])

        self.assertEqual(0, report.tainted_bytes)
        self.assertEqual({0: SourceBytes(), 3: SourceBytes()}, report.by_source)
        self.assertEqual({"0": {"direct": 0, "indirect": 0}, "3": {"direct": 0, "indirect": 0}},
                         report.to_dict()["memory"]["by_source"])
        self.assertEqual([], report.regions)

    def test_text(self):
        text = make_report(self.instance, [i32(5, TaintLabel({0: D}))]).to_text()

        self.assertEqual([
            "result0 i32:5 {src0: DIRECT}",
            "sources: src0, src1",
            "memory: 6 tainted bytes",
            "  src0: direct=4 indirect=2",
            "  src1: direct=2 indirect=0",
            "  mem[16..19] {src0: DIRECT}",
            "  mem[20..21] {src0: INDIRECT, src1: DIRECT}",
            "statistics: instructions=12",
        ], text.splitlines())

    def test_no_sources_text(self):
        text = TaintReport().to_text()

        self.assertIn("sources: none", text)

    def test_tainted_last_byte_closes_region(self):
        memory = LinearMemory(1)
        memory_store_taint(memory, len(memory) - 1, 1, TaintLabel({0: D}))

        report = make_report(FakeInstance([0], memory), [])

        self.assertEqual([TaintRegion(len(memory) - 1, len(memory) - 1, TaintLabel({0: D}))], report.regions)


class TestEncoder(unittest.TestCase):
    def test_numpy_values(self):
        document = json.dumps({'n': np.int64(3), 'xs': np.arange(2), 'label': TaintLabel({1: I})}, cls=ReportEncoder)

        self.assertEqual({'n': 3, 'xs': [0, 1], 'label': {'1': 'INDIRECT'}}, json.loads(document))

    def test_signed(self):
        self.assertEqual(-1, signed('i32', 0xFFFFFFFF))
        self.assertEqual(-1, signed('i64', 0xFFFFFFFFFFFFFFFF))
        self.assertEqual(0x7FFFFFFF, signed('i32', 0x7FFFFFFF))
