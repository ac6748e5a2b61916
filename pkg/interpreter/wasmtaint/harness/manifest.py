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
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

from wasmtaint.exception import ManifestException
from wasmtaint.runtime.values import parse_literal
from wasmtaint.taint.labels import EMPTY, TaintLabel

logger = logging.getLogger(__name__)

CATEGORIES = ('loops', 'conditionals', 'recursion', 'conversion', 'array', 'totient', 'indirect', 'escape',
              'traps')

SIZE_PLACEHOLDER = '{n}'


@dataclass
class MemoryCheck:
    addr: int
    width: int
    taint: TaintLabel


@dataclass
class Fixture:
    """
    One corpus entry: invoke ``invoke`` of ``module`` with ``args`` and
    compare results, trap status, result taint and memory checks.

    Exactly one of ``results`` and ``trap`` is set.
    """
    name: str
    module: str
    invoke: str
    category: str
    args: List[str] = field(default_factory=list)
    taint: List[int] = field(default_factory=list)
    results: Optional[List[str]] = None
    result_taint: List[TaintLabel] = field(default_factory=list)
    trap: Optional[str] = None
    memory: List[MemoryCheck] = field(default_factory=list)
    expected_unsound: bool = False
    max_depth: Optional[int] = None

    def arguments(self):
        """Typed argument values; tainted positions carry a DIRECT label of their own index."""
        return [parse_literal(text, TaintLabel.direct(i) if i in self.taint else EMPTY)
                for i, text in enumerate(self.args)]

    def expected_results(self):
        return [parse_literal(text) for text in self.results or []]


@dataclass
class FixtureManifest:
    path: str
    fixtures: List[Fixture] = field(default_factory=list)

    def __len__(self):
        return len(self.fixtures)

    def categories(self):
        return sorted({fixture.category for fixture in self.fixtures})


@dataclass
class BenchCase:
    """
    A benchmark case. ``args`` are literal templates in which ``{n}`` is
    replaced by each input size.
    """
    case: str
    module: str
    invoke: str
    sizes: List[int]
    args: List[str] = field(default_factory=lambda: ['i32:' + SIZE_PLACEHOLDER])
    taint: List[int] = field(default_factory=lambda: [0])

    def arguments(self, n, tainted=True):
        values = []
        for i, template in enumerate(self.args):
            label = TaintLabel.direct(i) if tainted and i in self.taint else EMPTY
            values.append(parse_literal(template.replace(SIZE_PLACEHOLDER, str(n)), label))
        return values


@dataclass
class BenchManifest:
    path: str
    cases: List[BenchCase] = field(default_factory=list)
    repeats: Optional[int] = None


def _read_json(path):
    try:
        with open(path) as manifest_file:
            return json.load(manifest_file)
    except OSError as e:
        raise ManifestException("Cannot read manifest {}: {}".format(path, e))
    except ValueError as e:
        raise ManifestException("Manifest {} is not valid JSON: {}".format(path, e))


def _require(entry, key, kind, where):
    if key not in entry:
        raise ManifestException("{}: missing '{}'".format(where, key))
    value = entry[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ManifestException("{}: '{}' has the wrong type".format(where, key))
    return value


def _optional(entry, key, kind, where, default=None):
    if key not in entry or entry[key] is None:
        return default
    return _require(entry, key, kind, where)


def _resolve(base, module, where):
    path = module if os.path.isabs(module) else os.path.join(base, module)
    if not os.path.isfile(path):
        raise ManifestException("{}: module file {} does not exist".format(where, path))
    return path


def _check_literals(literals, where):
    for text in literals:
        if not isinstance(text, str):
            raise ManifestException("{}: literal {!r} must be a string".format(where, text))
        try:
            parse_literal(text.replace(SIZE_PLACEHOLDER, '0'))
        except ValueError as e:
            raise ManifestException("{}: {}".format(where, e))


def _check_taint_indices(indices, arg_count, where):
    for index in indices:
        if not isinstance(index, int) or isinstance(index, bool) or not 0 <= index < arg_count:
            raise ManifestException("{}: taint index {!r} is not an argument position".format(where, index))


def _label(raw, declared, where):
    if not isinstance(raw, dict):
        raise ManifestException("{}: taint map must be an object".format(where))
    try:
        label = TaintLabel(raw)
    except (KeyError, ValueError) as e:
        raise ManifestException("{}: invalid taint map {}: {}".format(where, raw, e))
    for source in label:
        if source not in declared:
            raise ManifestException("{}: taint map references undeclared source {}".format(where, source))
    return label


def _load_fixture(entry, base):
    if not isinstance(entry, dict):
        raise ManifestException("fixture entries must be objects")
    name = _require(entry, 'name', str, 'fixture')
    where = "fixture '{}'".format(name)
    module = _resolve(base, _require(entry, 'module', str, where), where)
    category = _require(entry, 'category', str, where)
    if category not in CATEGORIES:
        raise ManifestException("{}: unknown category '{}'".format(where, category))

    args = _optional(entry, 'args', list, where, [])
    _check_literals(args, where)
    taint = _optional(entry, 'taint', list, where, [])
    _check_taint_indices(taint, len(args), where)

    results = _optional(entry, 'results', list, where)
    trap = _optional(entry, 'trap', str, where)
    if (results is None) == (trap is None):
        raise ManifestException("{}: exactly one of 'results' and 'trap' is required".format(where))
    if results is not None:
        _check_literals(results, where)

    result_taint = [_label(raw, taint, where) for raw in _optional(entry, 'result_taint', list, where, [])]
    if results is not None and result_taint and len(result_taint) != len(results):
        raise ManifestException("{}: {} taint maps for {} results".format(where, len(result_taint), len(results)))
    if results is not None and not result_taint:
        result_taint = [EMPTY] * len(results)

    checks = []
    for check in _optional(entry, 'memory', list, where, []):
        if not isinstance(check, dict):
            raise ManifestException("{}: memory checks must be objects".format(where))
        checks.append(MemoryCheck(_require(check, 'addr', int, where),
                                  _require(check, 'width', int, where),
                                  _label(_require(check, 'taint', dict, where), taint, where)))

    max_depth = _optional(entry, 'max_depth', int, where)
    if max_depth is not None and max_depth < 1:
        raise ManifestException("{}: max_depth must be positive".format(where))

    return Fixture(name=name, module=module, invoke=_require(entry, 'invoke', str, where), category=category,
                   args=args, taint=taint, results=results, result_taint=result_taint, trap=trap,
                   memory=checks, expected_unsound=_optional(entry, 'expected_unsound', bool, where, False),
                   max_depth=max_depth)


def load_manifest(path):
    """
    Read a fixture manifest, a JSON object ``{"fixtures": [...]}``. Module
    paths are resolved relative to the manifest's directory.

    :raises ManifestException: unreadable file or schema violation
    """
    document = _read_json(path)
    if not isinstance(document, dict):
        raise ManifestException("Manifest {} must be a JSON object".format(path))
    base = os.path.dirname(os.path.abspath(path))
    fixtures = [_load_fixture(entry, base) for entry in _require(document, 'fixtures', list, path)]

    names = [fixture.name for fixture in fixtures]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise ManifestException("Duplicate fixture names: {}".format(", ".join(duplicates)))

    logger.debug("loaded {} fixtures from {}".format(len(fixtures), path))
    return FixtureManifest(path, fixtures)


def load_bench_manifest(path):
    """Read a benchmark manifest, ``{"repeats": R, "cases": [...]}``."""
    document = _read_json(path)
    if not isinstance(document, dict):
        raise ManifestException("Manifest {} must be a JSON object".format(path))
    base = os.path.dirname(os.path.abspath(path))
    repeats = _optional(document, 'repeats', int, path)
    if repeats is not None and repeats < 1:
        raise ManifestException("{}: repeats must be positive".format(path))

    cases = []
    for entry in _require(document, 'cases', list, path):
        if not isinstance(entry, dict):
            raise ManifestException("bench cases must be objects")
        name = _require(entry, 'case', str, 'bench case')
        where = "bench case '{}'".format(name)
        sizes = _require(entry, 'sizes', list, where)
        if not sizes or any(not isinstance(n, int) or isinstance(n, bool) or n < 0 for n in sizes):
            raise ManifestException("{}: sizes must be non-negative integers".format(where))
        args = _optional(entry, 'args', list, where, ['i32:' + SIZE_PLACEHOLDER])
        _check_literals(args, where)
        taint = _optional(entry, 'taint', list, where, [0])
        _check_taint_indices(taint, len(args), where)
        cases.append(BenchCase(case=name, module=_resolve(base, _require(entry, 'module', str, where), where),
                               invoke=_require(entry, 'invoke', str, where), sizes=sizes, args=args, taint=taint))
    return BenchManifest(path, cases, repeats)
