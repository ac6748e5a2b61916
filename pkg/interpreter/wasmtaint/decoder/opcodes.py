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
MVP opcode table. Every opcode maps to its text name and the kind of
immediate that follows it in the binary.
"""

NO_IMMEDIATE = 'none'
BLOCK_TYPE = 'blocktype'
LABEL_INDEX = 'label'
LABEL_TABLE = 'br_table'
FUNC_INDEX = 'func'
CALL_INDIRECT = 'call_indirect'
LOCAL_INDEX = 'local'
GLOBAL_INDEX = 'global'
MEMORY_ARG = 'memarg'
MEMORY_INDEX = 'memory'
I32_CONST = 'i32'
I64_CONST = 'i64'
F32_CONST = 'f32'
F64_CONST = 'f64'

_CONTROL = [
    (0x00, 'unreachable', NO_IMMEDIATE),
    (0x01, 'nop', NO_IMMEDIATE),
    (0x02, 'block', BLOCK_TYPE),
    (0x03, 'loop', BLOCK_TYPE),
    (0x04, 'if', BLOCK_TYPE),
    (0x05, 'else', NO_IMMEDIATE),
    (0x0b, 'end', NO_IMMEDIATE),
    (0x0c, 'br', LABEL_INDEX),
    (0x0d, 'br_if', LABEL_INDEX),
    (0x0e, 'br_table', LABEL_TABLE),
    (0x0f, 'return', NO_IMMEDIATE),
    (0x10, 'call', FUNC_INDEX),
    (0x11, 'call_indirect', CALL_INDIRECT),
    (0x1a, 'drop', NO_IMMEDIATE),
    (0x1b, 'select', NO_IMMEDIATE),
]

_VARIABLE = [
    (0x20, 'local.get', LOCAL_INDEX),
    (0x21, 'local.set', LOCAL_INDEX),
    (0x22, 'local.tee', LOCAL_INDEX),
    (0x23, 'global.get', GLOBAL_INDEX),
    (0x24, 'global.set', GLOBAL_INDEX),
]

_MEMORY = [
    (0x28, 'i32.load', MEMORY_ARG),
    (0x29, 'i64.load', MEMORY_ARG),
    (0x2a, 'f32.load', MEMORY_ARG),
    (0x2b, 'f64.load', MEMORY_ARG),
    (0x2c, 'i32.load8_s', MEMORY_ARG),
    (0x2d, 'i32.load8_u', MEMORY_ARG),
    (0x2e, 'i32.load16_s', MEMORY_ARG),
    (0x2f, 'i32.load16_u', MEMORY_ARG),
    (0x30, 'i64.load8_s', MEMORY_ARG),
    (0x31, 'i64.load8_u', MEMORY_ARG),
    (0x32, 'i64.load16_s', MEMORY_ARG),
    (0x33, 'i64.load16_u', MEMORY_ARG),
    (0x34, 'i64.load32_s', MEMORY_ARG),
    (0x35, 'i64.load32_u', MEMORY_ARG),
    (0x36, 'i32.store', MEMORY_ARG),
    (0x37, 'i64.store', MEMORY_ARG),
    (0x38, 'f32.store', MEMORY_ARG),
    (0x39, 'f64.store', MEMORY_ARG),
    (0x3a, 'i32.store8', MEMORY_ARG),
    (0x3b, 'i32.store16', MEMORY_ARG),
    (0x3c, 'i64.store8', MEMORY_ARG),
    (0x3d, 'i64.store16', MEMORY_ARG),
    (0x3e, 'i64.store32', MEMORY_ARG),
    (0x3f, 'memory.size', MEMORY_INDEX),
    (0x40, 'memory.grow', MEMORY_INDEX),
]

_CONSTANT = [
    (0x41, 'i32.const', I32_CONST),
    (0x42, 'i64.const', I64_CONST),
    (0x43, 'f32.const', F32_CONST),
    (0x44, 'f64.const', F64_CONST),
]

_NUMERIC_NAMES = (
    'i32.eqz i32.eq i32.ne i32.lt_s i32.lt_u i32.gt_s i32.gt_u i32.le_s i32.le_u i32.ge_s i32.ge_u '
    'i64.eqz i64.eq i64.ne i64.lt_s i64.lt_u i64.gt_s i64.gt_u i64.le_s i64.le_u i64.ge_s i64.ge_u '
    'f32.eq f32.ne f32.lt f32.gt f32.le f32.ge '
    'f64.eq f64.ne f64.lt f64.gt f64.le f64.ge '
    'i32.clz i32.ctz i32.popcnt i32.add i32.sub i32.mul i32.div_s i32.div_u i32.rem_s i32.rem_u '
    'i32.and i32.or i32.xor i32.shl i32.shr_s i32.shr_u i32.rotl i32.rotr '
    'i64.clz i64.ctz i64.popcnt i64.add i64.sub i64.mul i64.div_s i64.div_u i64.rem_s i64.rem_u '
    'i64.and i64.or i64.xor i64.shl i64.shr_s i64.shr_u i64.rotl i64.rotr '
    'f32.abs f32.neg f32.ceil f32.floor f32.trunc f32.nearest f32.sqrt '
    'f32.add f32.sub f32.mul f32.div f32.min f32.max f32.copysign '
    'f64.abs f64.neg f64.ceil f64.floor f64.trunc f64.nearest f64.sqrt '
    'f64.add f64.sub f64.mul f64.div f64.min f64.max f64.copysign '
    'i32.wrap_i64 i32.trunc_f32_s i32.trunc_f32_u i32.trunc_f64_s i32.trunc_f64_u '
    'i64.extend_i32_s i64.extend_i32_u i64.trunc_f32_s i64.trunc_f32_u i64.trunc_f64_s i64.trunc_f64_u '
    'f32.convert_i32_s f32.convert_i32_u f32.convert_i64_s f32.convert_i64_u f32.demote_f64 '
    'f64.convert_i32_s f64.convert_i32_u f64.convert_i64_s f64.convert_i64_u f64.promote_f32 '
    'i32.reinterpret_f32 i64.reinterpret_f64 f32.reinterpret_i32 f64.reinterpret_i64'
).split()

# 0x45 (i32.eqz) through 0xbf (f64.reinterpret_i64) are contiguous.
_NUMERIC = [(0x45 + i, name, NO_IMMEDIATE) for i, name in enumerate(_NUMERIC_NAMES)]

OPCODES = {code: (name, immediate) for code, name, immediate in _CONTROL + _VARIABLE + _MEMORY + _CONSTANT + _NUMERIC}
OPCODES_BY_NAME = {name: code for code, (name, _) in OPCODES.items()}

BLOCK_OPENERS = frozenset((0x02, 0x03, 0x04))
ELSE = 0x05
END = 0x0b


def is_float_opcode(name):
    """True for any opcode that reads, produces or converts a float."""
    return 'f32' in name or 'f64' in name


FLOAT_OPCODES = frozenset(code for code, (name, _) in OPCODES.items() if is_float_opcode(name))
