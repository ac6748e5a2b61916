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

from typing import NamedTuple

from wasmtaint.model.wasmmodel import F32, F64, I32, I64
from wasmtaint.taint.labels import EMPTY, TaintLabel

MASK_32 = 0xFFFFFFFF
MASK_64 = 0xFFFFFFFFFFFFFFFF
MASKS = {I32: MASK_32, I64: MASK_64, F32: MASK_32, F64: MASK_64}
BITS = {I32: 32, I64: 64, F32: 32, F64: 64}


class Value(NamedTuple):
    """A typed scalar. ``bits`` holds the unsigned payload."""
    vtype: str
    bits: int
    taint: TaintLabel = EMPTY

    @property
    def signed(self):
        width = BITS[self.vtype]
        if self.bits >> (width - 1):
            return self.bits - (1 << width)
        return self.bits

    def literal(self):
        return "{}:{}".format(self.vtype, self.signed)

    def __str__(self):
        if self.taint:
            return "{} {}".format(self.literal(), self.taint.compact())
        return self.literal()


def i32(value, taint=EMPTY):
    return Value(I32, value & MASK_32, taint)


def i64(value, taint=EMPTY):
    return Value(I64, value & MASK_64, taint)


def zero(vtype):
    return Value(vtype, 0, EMPTY)


def parse_literal(text, taint=EMPTY):
    """
    Parse a typed literal such as ``i32:5``, ``i64:-3`` or ``i32:0xff``.
    Signed and unsigned spellings are both accepted.
    """
    vtype, sep, raw = text.strip().partition(':')
    if not sep or vtype not in (I32, I64):
        raise ValueError("expected <i32|i64>:<value>, got '{}'".format(text))
    try:
        number = int(raw, 0)
    except ValueError:
        raise ValueError("invalid integer '{}' in '{}'".format(raw, text))
    width = BITS[vtype]
    if not -(1 << (width - 1)) <= number < (1 << width):
        raise ValueError("'{}' does not fit in {}".format(text, vtype))
    return Value(vtype, number & MASKS[vtype], taint)
