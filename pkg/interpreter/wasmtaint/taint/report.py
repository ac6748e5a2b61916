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
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from wasmtaint.taint.labels import TaintLabel, TaintLevel

SIGN_BIT = {'i32': 1 << 31, 'i64': 1 << 63}


def signed(vtype, bits):
    sign = SIGN_BIT.get(vtype)
    if sign is not None and bits & sign:
        return bits - (sign << 1)
    return bits


@dataclass
class ResultTaint:
    vtype: str
    value: int
    taint: TaintLabel


@dataclass
class SourceBytes:
    direct: int = 0
    indirect: int = 0


@dataclass
class TaintRegion:
    start: int
    end: int
    taint: TaintLabel


@dataclass
class TaintReport:
    """
    Final taint of one invocation.

    :attribute sources: declared taint-source ids (argument positions)
    :attribute results: per result value, its type, signed value and label
    :attribute tainted_bytes: linear-memory bytes with a non-empty label
    :attribute by_source: per source, bytes labeled DIRECT and INDIRECT
    :attribute regions: maximal runs of equally labeled tainted bytes
    :attribute statistics: execution counters of the run
    """
    sources: List[int] = field(default_factory=list)
    results: List[ResultTaint] = field(default_factory=list)
    tainted_bytes: int = 0
    by_source: Dict[int, SourceBytes] = field(default_factory=dict)
    regions: List[TaintRegion] = field(default_factory=list, compare=False)
    statistics: Dict[str, int] = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "sources": list(self.sources),
            "results": [
                {"type": result.vtype, "value": str(result.value), "taint": result.taint}
                for result in self.results
            ],
            "memory": {
                "tainted_bytes": self.tainted_bytes,
                "by_source": {
                    str(source): {"direct": counts.direct, "indirect": counts.indirect}
                    for source, counts in sorted(self.by_source.items())
                },
            },
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), cls=ReportEncoder, indent=indent)

    @staticmethod
    def from_json(text):
        document = json.loads(text)
        results = [
            ResultTaint(entry["type"], int(entry["value"]), TaintLabel(entry["taint"]))
            for entry in document["results"]
        ]
        by_source = {
            int(source): SourceBytes(counts["direct"], counts["indirect"])
            for source, counts in document["memory"]["by_source"].items()
        }
        return TaintReport(
            sources=[int(source) for source in document["sources"]],
            results=results,
            tainted_bytes=document["memory"]["tainted_bytes"],
            by_source=by_source,
        )

    def to_text(self):
        lines = []
        for i, result in enumerate(self.results):
            lines.append("result{} {}:{} {!r}".format(i, result.vtype, result.value, result.taint))
        lines.append("sources: {}".format(", ".join("src{}".format(s) for s in self.sources) or "none"))
        lines.append("memory: {} tainted bytes".format(self.tainted_bytes))
        for source, counts in sorted(self.by_source.items()):
            lines.append("  src{}: direct={} indirect={}".format(source, counts.direct, counts.indirect))
        for region in self.regions:
            lines.append("  mem[{}..{}] {!r}".format(region.start, region.end, region.taint))
        if self.statistics:
            lines.append("statistics: " + " ".join("{}={}".format(k, v) for k, v in self.statistics.items()))
        return "\n".join(lines)


class ReportEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, TaintLabel):
            return {str(source): obj[source].name for source in sorted(obj)}
        elif isinstance(obj, TaintLevel):
            return obj.name
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, np.generic):
            return obj.item()
        return json.JSONEncoder.default(self, obj)


def make_report(instance, results):
    """
    Summarize the labels of ``results`` and of the instance's linear
    memory after an invocation finished or trapped.
    """
    sources = list(instance.taint_sources)
    by_source = {source: SourceBytes() for source in sources}
    regions = []
    memory = instance.memory
    tainted = 0

    if memory.tainted_bytes:
        run_start, run_label = None, None
        for addr, label in enumerate(memory.shadow):
            if label:
                tainted += 1
                for source, level in label.items():
                    counts = by_source.setdefault(source, SourceBytes())
                    if level == TaintLevel.DIRECT:
                        counts.direct += 1
                    else:
                        counts.indirect += 1
            if label != run_label:
                if run_label:
                    regions.append(TaintRegion(run_start, addr - 1, run_label))
                run_start, run_label = addr, label
        if run_label:
            regions.append(TaintRegion(run_start, len(memory.shadow) - 1, run_label))

    return TaintReport(
        sources=sources,
        results=[ResultTaint(value.vtype, signed(value.vtype, value.bits), value.taint) for value in results],
        tainted_bytes=tainted,
        by_source=by_source,
        regions=regions,
        statistics=dict(instance.statistics()),
    )
