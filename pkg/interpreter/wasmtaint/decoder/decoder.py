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

from wasmtaint.decoder import opcodes
from wasmtaint.decoder.leb128 import decode_sleb128, decode_uleb128
from wasmtaint.exception import (BadMagicException, MalformedModuleException, UnknownOpcodeException,
                                 UnsupportedFeatureException, UnsupportedVersionException)
from wasmtaint.model.wasmmodel import (BrTable, CallIndirect, DataSegment, ElementSegment, Export, EXTERNAL_FUNC,
                                       EXTERNAL_GLOBAL, EXTERNAL_KINDS, EXTERNAL_MEMORY, EXTERNAL_TABLE, FUNC_REF,
                                       FuncType, Function, Global, I32, I64, F32, F64, Instr, Limits, MAX_PAGES,
                                       MemArg, Memory, ModuleDef, Table, VALUE_TYPES)

logger = logging.getLogger(__name__)

MAGIC = b'\x00asm'
SUPPORTED_VERSION = 1

CUSTOM_SECTION = 0
TYPE_SECTION = 1
IMPORT_SECTION = 2
FUNCTION_SECTION = 3
TABLE_SECTION = 4
MEMORY_SECTION = 5
GLOBAL_SECTION = 6
EXPORT_SECTION = 7
START_SECTION = 8
ELEMENT_SECTION = 9
CODE_SECTION = 10
DATA_SECTION = 11

SECTION_NAMES = {
    TYPE_SECTION: 'type', IMPORT_SECTION: 'import', FUNCTION_SECTION: 'function', TABLE_SECTION: 'table',
    MEMORY_SECTION: 'memory', GLOBAL_SECTION: 'global', EXPORT_SECTION: 'export', START_SECTION: 'start',
    ELEMENT_SECTION: 'element', CODE_SECTION: 'code', DATA_SECTION: 'data'
}

MASK_32 = 0xFFFFFFFF
MASK_64 = 0xFFFFFFFFFFFFFFFF
MAX_LOCALS = 1 << 32

_CONST_OPCODES = {
    opcodes.OPCODES_BY_NAME['i32.const']: I32,
    opcodes.OPCODES_BY_NAME['i64.const']: I64,
    opcodes.OPCODES_BY_NAME['f32.const']: F32,
    opcodes.OPCODES_BY_NAME['f64.const']: F64,
}
_GLOBAL_GET = opcodes.OPCODES_BY_NAME['global.get']
_GLOBAL_SET = opcodes.OPCODES_BY_NAME['global.set']


class _Reader(object):
    """Bounded cursor over the module bytes. Every read either advances or raises."""

    __slots__ = ('data', 'position', 'end')

    def __init__(self, data, position=0, end=None):
        self.data = data
        self.position = position
        self.end = len(data) if end is None else end

    def at_end(self):
        return self.position >= self.end

    def byte(self):
        if self.position >= self.end:
            raise MalformedModuleException("unexpected end", self.position)
        b = self.data[self.position]
        self.position += 1
        return b

    def raw(self, length):
        if length > self.end - self.position:
            raise MalformedModuleException("unexpected end", self.position)
        start = self.position
        self.position += length
        return bytes(self.data[start:self.position])

    def _advance(self, start, consumed):
        if start + consumed > self.end:
            raise MalformedModuleException("unexpected end", start)
        self.position = start + consumed

    def skip(self, length):
        if length > self.end - self.position:
            raise MalformedModuleException("unexpected end", self.position)
        self.position += length

    def u32(self):
        start = self.position
        value, consumed = decode_uleb128(self.data, start)
        if consumed > 5 or value > MASK_32:
            raise MalformedModuleException("integer too large", start)
        self._advance(start, consumed)
        return value

    def s32(self):
        start = self.position
        value, consumed = decode_sleb128(self.data, start)
        if consumed > 5 or not -(1 << 31) <= value < (1 << 31):
            raise MalformedModuleException("integer too large", start)
        self._advance(start, consumed)
        return value

    def s64(self):
        start = self.position
        value, consumed = decode_sleb128(self.data, start)
        self._advance(start, consumed)
        return value

    def name(self):
        start = self.position
        raw = self.raw(self.u32())
        try:
            return raw.decode('utf-8')
        except UnicodeDecodeError:
            raise MalformedModuleException("malformed UTF-8 name", start)

    def value_type(self):
        start = self.position
        code = self.byte()
        if code not in VALUE_TYPES:
            raise MalformedModuleException("invalid value type {:#04x}".format(code), start)
        return VALUE_TYPES[code]

    def vector(self, read_item):
        return [read_item() for _ in range(self.u32())]


def validate_header(data):
    """
    Check the magic number and version at the start of a binary.

    :return: the binary format version
    """
    if len(data) < 4 or bytes(data[:4]) != MAGIC:
        raise BadMagicException()
    if len(data) < 8:
        raise MalformedModuleException("truncated header", 4)
    version = int.from_bytes(data[4:8], 'little')
    if version != SUPPORTED_VERSION:
        raise UnsupportedVersionException(version)
    return version


def decode_module(data):
    """
    Decode a complete binary into a ModuleDef, validating section order,
    section sizes, function bodies and every index the module refers to.
    """
    module = ModuleDef(version=validate_header(data))
    reader = _Reader(data, 8)
    function_types = []
    code_entries = None
    last_id = CUSTOM_SECTION

    while not reader.at_end():
        section_offset = reader.position
        section_id = reader.byte()
        size = reader.u32()
        start = reader.position
        end = start + size
        if end > len(data):
            raise MalformedModuleException("section size exceeds module length", section_offset)
        section = _Reader(data, start, end)

        if section_id == CUSTOM_SECTION:
            module.custom_sections.append(section.name())
            logger.debug("skipping custom section '{}'".format(module.custom_sections[-1]))
            reader.position = end
            continue
        if section_id not in SECTION_NAMES:
            raise MalformedModuleException("unknown section id {}".format(section_id), section_offset)
        if section_id <= last_id:
            raise MalformedModuleException("{} section out of order".format(SECTION_NAMES[section_id]),
                                           section_offset)
        last_id = section_id

        if section_id == IMPORT_SECTION:
            raise UnsupportedFeatureException("import section is not supported")
        elif section_id == TYPE_SECTION:
            module.types = section.vector(lambda: _read_func_type(section))
        elif section_id == FUNCTION_SECTION:
            function_types = section.vector(section.u32)
            for type_index in function_types:
                if type_index >= len(module.types):
                    raise MalformedModuleException("unknown type {}".format(type_index), start)
            module.functions = [Function(type_index=t) for t in function_types]
        elif section_id == TABLE_SECTION:
            module.tables = section.vector(lambda: _read_table(section))
            if len(module.tables) > 1:
                raise MalformedModuleException("multiple tables", start)
        elif section_id == MEMORY_SECTION:
            module.memories = section.vector(lambda: Memory(_read_limits(section, MAX_PAGES)))
            if len(module.memories) > 1:
                raise MalformedModuleException("multiple memories", start)
        elif section_id == GLOBAL_SECTION:
            module.globals = section.vector(lambda: _read_global(section))
        elif section_id == EXPORT_SECTION:
            for name, export in section.vector(lambda: _read_export(section)):
                if name in module.exports:
                    raise MalformedModuleException("duplicate export name '{}'".format(name), start)
                module.exports[name] = export
        elif section_id == START_SECTION:
            module.start = section.u32()
        elif section_id == ELEMENT_SECTION:
            module.element_segments = section.vector(lambda: _read_element_segment(section))
        elif section_id == CODE_SECTION:
            code_entries = section.vector(lambda: _read_code_entry(section))
            if len(code_entries) != len(module.functions):
                raise MalformedModuleException("function and code section have inconsistent lengths", start)
            for func_index, (body_offset, body_size) in enumerate(code_entries):
                func = module.functions[func_index]
                func.locals, func.body = decode_function_body(data, body_offset, body_size, module, func_index)
                func.offset = body_offset
        elif section_id == DATA_SECTION:
            module.data_segments = section.vector(lambda: _read_data_segment(section))

        if section.position != end:
            raise MalformedModuleException("{} section size mismatch".format(SECTION_NAMES[section_id]),
                                           section_offset)
        logger.debug("decoded {} section ({} bytes)".format(SECTION_NAMES[section_id], size))
        reader.position = end

    if code_entries is None and module.functions:
        raise MalformedModuleException("function and code section have inconsistent lengths")
    _validate_references(module)
    return module


def _read_func_type(reader):
    start = reader.position
    form = reader.byte()
    if form != 0x60:
        raise MalformedModuleException("invalid function type form {:#04x}".format(form), start)
    params = tuple(reader.vector(reader.value_type))
    results = tuple(reader.vector(reader.value_type))
    if len(results) > 1:
        raise UnsupportedFeatureException("multi-value results are not supported")
    return FuncType(params, results)


def _read_limits(reader, maximum_allowed=None):
    start = reader.position
    flag = reader.byte()
    if flag not in (0, 1):
        raise MalformedModuleException("invalid limits flag {:#04x}".format(flag), start)
    minimum = reader.u32()
    maximum = reader.u32() if flag == 1 else None
    if maximum is not None and maximum < minimum:
        raise MalformedModuleException("limits maximum is below minimum", start)
    if maximum_allowed is not None and max(minimum, maximum or 0) > maximum_allowed:
        raise MalformedModuleException("memory size must be at most {} pages".format(maximum_allowed), start)
    return Limits(minimum, maximum)


def _read_table(reader):
    start = reader.position
    element_type = reader.byte()
    if element_type != FUNC_REF:
        raise MalformedModuleException("unsupported table element type {:#04x}".format(element_type), start)
    return Table(element_type, _read_limits(reader))


def _read_const_expr(reader, expected_type):
    start = reader.position
    opcode = reader.byte()
    if opcode == _GLOBAL_GET:
        # only imported globals may appear here, and imports are rejected
        raise MalformedModuleException("unknown global in constant expression", start)
    if opcode not in _CONST_OPCODES:
        raise MalformedModuleException("constant expression required", start)
    vtype = _CONST_OPCODES[opcode]
    if vtype != expected_type:
        raise MalformedModuleException("type mismatch in constant expression", start)
    name, immediate = opcodes.OPCODES[opcode]
    imm = _read_immediate(reader, immediate, start)
    end_offset = reader.position
    if reader.byte() != opcodes.END:
        raise MalformedModuleException("constant expression must be a single instruction", end_offset)
    return Instr(opcode, name, imm, start, None, None)


def _read_global(reader):
    vtype = reader.value_type()
    start = reader.position
    mutability = reader.byte()
    if mutability not in (0, 1):
        raise MalformedModuleException("invalid global mutability", start)
    return Global(vtype, mutability == 1, _read_const_expr(reader, vtype))


def _read_export(reader):
    name = reader.name()
    start = reader.position
    kind = reader.byte()
    if kind >= len(EXTERNAL_KINDS):
        raise MalformedModuleException("invalid export kind {:#04x}".format(kind), start)
    return name, Export(EXTERNAL_KINDS[kind], reader.u32())


def _read_element_segment(reader):
    start = reader.position
    table_index = reader.u32()
    if table_index != 0:
        raise MalformedModuleException("unknown table {}".format(table_index), start)
    offset = _read_const_expr(reader, I32)
    return ElementSegment(table_index, offset, reader.vector(reader.u32))


def _read_data_segment(reader):
    start = reader.position
    memory_index = reader.u32()
    if memory_index != 0:
        raise MalformedModuleException("unknown memory {}".format(memory_index), start)
    offset = _read_const_expr(reader, I32)
    return DataSegment(memory_index, offset, reader.raw(reader.u32()))


def _read_code_entry(reader):
    size = reader.u32()
    offset = reader.position
    reader.skip(size)
    return offset, size


def _read_immediate(reader, immediate, offset):
    if immediate == opcodes.NO_IMMEDIATE:
        return None
    if immediate == opcodes.I32_CONST:
        return reader.s32() & MASK_32
    if immediate == opcodes.I64_CONST:
        return reader.s64() & MASK_64
    if immediate == opcodes.LOCAL_INDEX or immediate == opcodes.GLOBAL_INDEX \
            or immediate == opcodes.FUNC_INDEX or immediate == opcodes.LABEL_INDEX:
        return reader.u32()
    if immediate == opcodes.MEMORY_ARG:
        align = reader.u32()
        return MemArg(align, reader.u32())
    if immediate == opcodes.BLOCK_TYPE:
        code = reader.byte()
        if code == 0x40:
            return ()
        if code in VALUE_TYPES:
            return (VALUE_TYPES[code],)
        raise UnsupportedFeatureException("multi-value block types are not supported")
    if immediate == opcodes.LABEL_TABLE:
        depths = tuple(reader.vector(reader.u32))
        return BrTable(depths, reader.u32())
    if immediate == opcodes.CALL_INDIRECT:
        type_index = reader.u32()
        if reader.byte() != 0x00:
            raise MalformedModuleException("zero byte expected", offset)
        return CallIndirect(type_index, 0)
    if immediate == opcodes.MEMORY_INDEX:
        if reader.byte() != 0x00:
            raise MalformedModuleException("zero byte expected", offset)
        return 0
    if immediate == opcodes.F32_CONST:
        return int.from_bytes(reader.raw(4), 'little')
    if immediate == opcodes.F64_CONST:
        return int.from_bytes(reader.raw(8), 'little')
    raise MalformedModuleException("unknown immediate kind {}".format(immediate), offset)


def decode_function_body(data, offset, length, module=None, func_index=None):
    """
    Decode one code-section entry into its locals declaration and its
    instruction sequence. Block/else/end targets are resolved here so the
    runtime can branch without rescanning.

    When ``module`` and ``func_index`` are given, local, global, function,
    type, table and memory references are validated against it.

    :return: tuple of (locals as (count, value type) runs, list of Instr)
    """
    if offset + length > len(data):
        raise MalformedModuleException("function body exceeds module length", offset)
    reader = _Reader(data, offset, offset + length)

    locals_declared = []
    total = 0
    for _ in range(reader.u32()):
        count = reader.u32()
        vtype = reader.value_type()
        total += count
        if total >= MAX_LOCALS:
            raise MalformedModuleException("too many locals", offset)
        locals_declared.append((count, vtype))

    validator = _ReferenceValidator(module, func_index, total) if module is not None else None
    rows = []
    open_blocks = []
    finished = False
    while not reader.at_end():
        position = reader.position
        if finished:
            raise MalformedModuleException("operators remaining after end of function", position)
        opcode = reader.byte()
        if opcode not in opcodes.OPCODES:
            raise UnknownOpcodeException(opcode, position)
        name, immediate = opcodes.OPCODES[opcode]
        imm = _read_immediate(reader, immediate, position)
        index = len(rows)

        if opcode in opcodes.BLOCK_OPENERS:
            open_blocks.append([index, None])
        elif opcode == opcodes.ELSE:
            if not open_blocks or rows[open_blocks[-1][0]][0] != 0x04 or open_blocks[-1][1] is not None:
                raise MalformedModuleException("else without matching if", position)
            open_blocks[-1][1] = index
            rows[open_blocks[-1][0]][4] = index
        elif opcode == opcodes.END:
            if open_blocks:
                opener, else_index = open_blocks.pop()
                rows[opener][5] = index
                if else_index is not None:
                    rows[else_index][5] = index
            else:
                finished = True
        elif name == 'br' or name == 'br_if':
            _check_depth(imm, open_blocks, position)
        elif name == 'br_table':
            for depth in imm.depths + (imm.default,):
                _check_depth(depth, open_blocks, position)

        if validator is not None:
            validator.check(opcode, name, imm, position)
        rows.append([opcode, name, imm, position, None, None])

    if not finished:
        raise MalformedModuleException("unexpected end of function body", offset + length)

    return locals_declared, [Instr(*row) for row in rows]


def _check_depth(depth, open_blocks, position):
    # the function body itself is the outermost label
    if depth > len(open_blocks):
        raise MalformedModuleException("unknown label {}".format(depth), position)


class _ReferenceValidator(object):
    def __init__(self, module, func_index, declared_locals):
        self.module = module
        func_type = module.types[module.functions[func_index].type_index]
        self.local_count = len(func_type.params) + declared_locals

    def check(self, opcode, name, imm, position):
        module = self.module
        if name.startswith('local.'):
            if imm >= self.local_count:
                raise MalformedModuleException("unknown local {}".format(imm), position)
        elif name.startswith('global.'):
            if imm >= len(module.globals):
                raise MalformedModuleException("unknown global {}".format(imm), position)
            if opcode == _GLOBAL_SET and not module.globals[imm].mutable:
                raise MalformedModuleException("global {} is immutable".format(imm), position)
        elif name == 'call':
            if imm >= len(module.functions):
                raise MalformedModuleException("unknown function {}".format(imm), position)
        elif name == 'call_indirect':
            if not module.tables:
                raise MalformedModuleException("unknown table", position)
            if imm.type_index >= len(module.types):
                raise MalformedModuleException("unknown type {}".format(imm.type_index), position)
        elif isinstance(imm, MemArg) or name.startswith('memory.'):
            if not module.memories:
                raise MalformedModuleException("unknown memory", position)


def _validate_references(module):
    for name, export in module.exports.items():
        limit = {
            EXTERNAL_FUNC: len(module.functions),
            EXTERNAL_TABLE: len(module.tables),
            EXTERNAL_MEMORY: len(module.memories),
            EXTERNAL_GLOBAL: len(module.globals),
        }[export.kind]
        if export.index >= limit:
            raise MalformedModuleException("export '{}' refers to unknown {} {}".format(name, export.kind,
                                                                                     export.index))
    if module.start is not None:
        if module.start >= len(module.functions):
            raise MalformedModuleException("unknown start function {}".format(module.start))
        if module.function_type(module.start) != FuncType():
            raise MalformedModuleException("start function must take no arguments and return nothing")
    for segment in module.element_segments:
        if not module.tables:
            raise MalformedModuleException("element segment without a table")
        for func_index in segment.function_indices:
            if func_index >= len(module.functions):
                raise MalformedModuleException("unknown function {} in element segment".format(func_index))
    if module.data_segments and not module.memories:
        raise MalformedModuleException("data segment without a memory")
