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

"""
Integer semantics of the MVP numeric opcodes. Operands and results are
unsigned payloads; signed variants reinterpret them as two's complement.
"""

from collections import namedtuple

from wasmtaint.exception import TrapException, TrapReason
from wasmtaint.model.wasmmodel import I32, I64
from wasmtaint.runtime.values import MASK_32, MASK_64, Value
from wasmtaint.taint.labels import EMPTY, merge_direct

NumericOp = namedtuple('NumericOp', 'params result fn')


def _signed(width):
    sign = 1 << (width - 1)
    modulus = 1 << width

    def to_signed(x):
        return x - modulus if x & sign else x
    return to_signed


s32 = _signed(32)
s64 = _signed(64)


def _div_s(to_signed, mask, minimum):
    def div_s(a, b):
        a, b = to_signed(a), to_signed(b)
        if b == 0:
            raise TrapException(TrapReason.DIVIDE_BY_ZERO)
        if a == minimum and b == -1:
            raise TrapException(TrapReason.INTEGER_OVERFLOW)
        quotient = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            quotient = -quotient
        return quotient & mask
    return div_s


def _rem_s(to_signed, mask):
    def rem_s(a, b):
        a, b = to_signed(a), to_signed(b)
        if b == 0:
            raise TrapException(TrapReason.DIVIDE_BY_ZERO)
        remainder = abs(a) % abs(b)
        return (-remainder if a < 0 else remainder) & mask
    return rem_s


def _div_u(a, b):
    if b == 0:
        raise TrapException(TrapReason.DIVIDE_BY_ZERO)
    return a // b


def _rem_u(a, b):
    if b == 0:
        raise TrapException(TrapReason.DIVIDE_BY_ZERO)
    return a % b


def _integer_ops(vtype, width, mask, to_signed):
    minimum = -(1 << (width - 1))
    shift_mask = width - 1

    def rotl(a, b):
        k = b & shift_mask
        return ((a << k) | (a >> (width - k))) & mask

    def rotr(a, b):
        k = b & shift_mask
        return ((a >> k) | (a << (width - k))) & mask

    def ctz(a):
        return width if a == 0 else (a & -a).bit_length() - 1

    binary = {
        'add': lambda a, b: (a + b) & mask,
        'sub': lambda a, b: (a - b) & mask,
        'mul': lambda a, b: (a * b) & mask,
        'div_s': _div_s(to_signed, mask, minimum),
        'div_u': _div_u,
        'rem_s': _rem_s(to_signed, mask),
        'rem_u': _rem_u,
        'and': lambda a, b: a & b,
        'or': lambda a, b: a | b,
        'xor': lambda a, b: a ^ b,
        'shl': lambda a, b: (a << (b & shift_mask)) & mask,
        'shr_s': lambda a, b: (to_signed(a) >> (b & shift_mask)) & mask,
        'shr_u': lambda a, b: a >> (b & shift_mask),
        'rotl': rotl,
        'rotr': rotr,
    }
    compare = {
        'eq': lambda a, b: int(a == b),
        'ne': lambda a, b: int(a != b),
        'lt_s': lambda a, b: int(to_signed(a) < to_signed(b)),
        'lt_u': lambda a, b: int(a < b),
        'gt_s': lambda a, b: int(to_signed(a) > to_signed(b)),
        'gt_u': lambda a, b: int(a > b),
        'le_s': lambda a, b: int(to_signed(a) <= to_signed(b)),
        'le_u': lambda a, b: int(a <= b),
        'ge_s': lambda a, b: int(to_signed(a) >= to_signed(b)),
        'ge_u': lambda a, b: int(a >= b),
    }
    unary = {
        'clz': lambda a: width - a.bit_length(),
        'ctz': ctz,
        'popcnt': lambda a: bin(a).count('1'),
    }

    ops = {}
    for name, fn in binary.items():
        ops['{}.{}'.format(vtype, name)] = NumericOp((vtype, vtype), vtype, fn)
    for name, fn in compare.items():
        ops['{}.{}'.format(vtype, name)] = NumericOp((vtype, vtype), I32, fn)
    for name, fn in unary.items():
        ops['{}.{}'.format(vtype, name)] = NumericOp((vtype,), vtype, fn)
    ops['{}.eqz'.format(vtype)] = NumericOp((vtype,), I32, lambda a: int(a == 0))
    return ops


NUMERIC_OPS = {}
NUMERIC_OPS.update(_integer_ops(I32, 32, MASK_32, s32))
NUMERIC_OPS.update(_integer_ops(I64, 64, MASK_64, s64))
NUMERIC_OPS['i32.wrap_i64'] = NumericOp((I64,), I32, lambda a: a & MASK_32)
NUMERIC_OPS['i64.extend_i32_s'] = NumericOp((I32,), I64, lambda a: s32(a) & MASK_64)
NUMERIC_OPS['i64.extend_i32_u'] = NumericOp((I32,), I64, lambda a: a)


def exec_numeric(op, operands, context=EMPTY):
    """
    Apply a numeric opcode to ``operands`` (in stack order, deepest first).
    The result label is the point-wise max of the operand labels merged
    with ``context``.
    """
    numeric = NUMERIC_OPS.get(op)
    if numeric is None:
        raise TrapException(TrapReason.UNSUPPORTED_FLOAT if ('f32' in op or 'f64' in op) else TrapReason.TYPE_MISMATCH,
                            op)
    if len(operands) != len(numeric.params):
        raise TrapException(TrapReason.STACK_UNDERFLOW, op)
    label = EMPTY
    for operand, expected in zip(operands, numeric.params):
        if operand.vtype != expected:
            raise TrapException(TrapReason.TYPE_MISMATCH, "{} expects {}, got {}".format(op, expected, operand.vtype))
        label = merge_direct(label, operand.taint)
    if context:
        label = merge_direct(label, context)
    return Value(numeric.result, numeric.fn(*(operand.bits for operand in operands)), label)
