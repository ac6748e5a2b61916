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

from collections.abc import Mapping
from enum import IntEnum


class TaintLevel(IntEnum):
    NONE = 0
    INDIRECT = 1
    DIRECT = 2

    @property
    def short(self):
        return self.name[0]


class TaintLabel(Mapping):
    """
    Immutable sparse map from taint-source id to TaintLevel. A source that
    is not stored has level NONE, so NONE is never stored.
    """

    __slots__ = ('_levels', '_hash')

    def __init__(self, levels=None):
        self._levels = {}
        self._hash = None
        for source, level in (levels or {}).items():
            level = TaintLevel(level) if not isinstance(level, str) else TaintLevel[level]
            if level != TaintLevel.NONE:
                self._levels[int(source)] = level

    @classmethod
    def _wrap(cls, levels):
        label = cls.__new__(cls)
        label._levels = levels
        label._hash = None
        return label

    @classmethod
    def direct(cls, source):
        return cls._wrap({source: TaintLevel.DIRECT})

    def __getitem__(self, source):
        return self._levels[source]

    def __iter__(self):
        return iter(self._levels)

    def __len__(self):
        return len(self._levels)

    def __bool__(self):
        return bool(self._levels)

    def __eq__(self, other):
        if isinstance(other, TaintLabel):
            return self._levels == other._levels
        return Mapping.__eq__(self, other)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._levels.items()))
        return self._hash

    def level(self, source):
        return self._levels.get(source, TaintLevel.NONE)

    def has_direct(self):
        return TaintLevel.DIRECT in self._levels.values()

    def compact(self):
        return "{" + ",".join("{}:{}".format(s, self._levels[s].short) for s in sorted(self._levels)) + "}"

    def __repr__(self):
        return "{" + ", ".join("src{}: {}".format(s, self._levels[s].name) for s in sorted(self._levels)) + "}"


EMPTY = TaintLabel()


def merge_direct(a, b):
    """Point-wise max of two labels."""
    if a is b or not b:
        return a
    if not a:
        return b
    levels = dict(a._levels)
    for source, level in b._levels.items():
        if levels.get(source, TaintLevel.NONE) < level:
            levels[source] = level
    return TaintLabel._wrap(levels)


def cap_indirect(a):
    """Lower every DIRECT entry to INDIRECT."""
    if not a or not a.has_direct():
        return a
    return TaintLabel._wrap({source: TaintLevel.INDIRECT for source in a._levels})


def assign_label(value_label, context, address_label=None):
    """
    Label attached whenever a value is written to a stack slot, local,
    global or memory bytes. ``context`` is either a ControlContext or an
    already effective context label.
    """
    effective = getattr(context, 'effective', context)
    label = merge_direct(value_label, cap_indirect(effective or EMPTY))
    if address_label:
        label = merge_direct(label, cap_indirect(address_label))
    return label
