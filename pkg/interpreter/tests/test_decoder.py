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

import os
import unittest

from wasmtaint.decoder.decoder import decode_function_body, decode_module, validate_header
from wasmtaint.exception import (BadMagicException, DecodeException, ExitCodes, MalformedModuleException,
                                 UnknownOpcodeException, UnsupportedFeatureException, UnsupportedVersionException)
from wasmtaint.model.wasmmodel import FuncType, MemArg
from tests.wasm_builder import (CODE, EXPORT, F32, I32, I64, MAGIC, TYPE, VERSION, ModuleBuilder, code, const_expr,
                                ins, uleb, vec)

CORPUS_BIN = os.path.join(os.path.dirname(__file__), '..', '..', 'tests', 'corpus', 'bin')


def add_module():
    builder = ModuleBuilder()
    builder.function([I32, I32], [I32], code(ins('local.get', 0), ins('local.get', 1), ins('i32.add')),
                     export='add')
    return builder


class TestHeader(unittest.TestCase):
    def test_version(self):
        self.assertEqual(1, validate_header(MAGIC + VERSION))

    def test_bad_magic(self):
        with self.assertRaises(BadMagicException):
            validate_header(b'\x00wasm\x01\x00\x00\x00')

    def test_empty(self):
        with self.assertRaises(BadMagicException):
            validate_header(b'')

    def test_unsupported_version(self):
        with self.assertRaises(UnsupportedVersionException) as context:
            validate_header(MAGIC + b'\x02\x00\x00\x00')
        self.assertEqual(2, context.exception.version)
        self.assertEqual(ExitCodes.DECODE, context.exception.code)

    def test_truncated_version(self):
        with self.assertRaises(MalformedModuleException):
            validate_header(MAGIC + b'\x01\x00')

    def test_empty_module(self):
        module = decode_module(MAGIC + VERSION)
        self.assertEqual([], module.functions)
        self.assertEqual({}, module.exports)


class TestSections(unittest.TestCase):
    def test_function_signature_and_export(self):
        module = decode_module(add_module().build())

        self.assertEqual([FuncType(('i32', 'i32'), ('i32',))], module.types)
        self.assertEqual(0, module.exported_function('add'))
        self.assertIsNone(module.exported_function('missing'))
        self.assertEqual(['local.get', 'local.get', 'i32.add', 'end'], [i.name for i in module.functions[0].body])

    def test_import_section_unsupported(self):
        builder = add_module()
        builder.import_function('env', 'log', 0)

        with self.assertRaises(UnsupportedFeatureException) as context:
            decode_module(builder.build())
        self.assertEqual(ExitCodes.UNSUPPORTED, context.exception.code)

    def test_custom_sections_recorded(self):
        module = decode_module(add_module().custom('name', b'\x00\x01\x02').custom('producers').build())

        self.assertEqual(['name', 'producers'], module.custom_sections)

    def test_section_out_of_order(self):
        types = ModuleBuilder.section(TYPE, vec([b'\x60\x00\x00']))
        exports = ModuleBuilder.section(EXPORT, vec([]))

        with self.assertRaises(MalformedModuleException):
            decode_module(MAGIC + VERSION + exports + types)

    def test_duplicate_section(self):
        types = ModuleBuilder.section(TYPE, vec([b'\x60\x00\x00']))

        with self.assertRaises(MalformedModuleException):
            decode_module(MAGIC + VERSION + types + types)

    def test_unknown_section(self):
        with self.assertRaises(MalformedModuleException):
            decode_module(MAGIC + VERSION + b'\x0c\x00')

    def test_section_size_exceeds_module(self):
        with self.assertRaises(MalformedModuleException):
            decode_module(MAGIC + VERSION + b'\x01\x10\x00')

    def test_section_size_mismatch(self):
        payload = vec([b'\x60\x00\x00']) + b'\x00'
        with self.assertRaises(MalformedModuleException):
            decode_module(MAGIC + VERSION + ModuleBuilder.section(TYPE, payload))

    def test_function_without_code(self):
        data = add_module().build()
        code_start = data.rindex(bytes([CODE]))
        with self.assertRaises(MalformedModuleException):
            decode_module(data[:code_start])

    def test_duplicate_export(self):
        builder = add_module()
        builder.exports.append(('add', 0x00, 0))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_export_unknown_function(self):
        builder = add_module()
        builder.exports.append(('ghost', 0x00, 7))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_memory_limits(self):
        builder = ModuleBuilder().memory(1, 2, export='memory')
        module = decode_module(builder.build())

        self.assertEqual((1, 2), tuple(module.memories[0].limits))

    def test_memory_maximum_above_limit(self):
        with self.assertRaises(MalformedModuleException):
            decode_module(ModuleBuilder().memory(1, 65537).build())

    def test_globals_and_segments(self):
        builder = ModuleBuilder().memory(1).table(2)
        builder.global_(I64, True, const_expr('i64.const', -5))
        f = builder.function([], [I32], ins('i32.const', 7))
        builder.data_segment(16, b'abc')
        builder.element_segment(1, [f])
        module = decode_module(builder.build())

        self.assertEqual('i64', module.globals[0].vtype)
        self.assertTrue(module.globals[0].mutable)
        self.assertEqual((1 << 64) - 5, module.globals[0].init.imm)
        self.assertEqual(b'abc', module.data_segments[0].data)
        self.assertEqual(16, module.data_segments[0].offset.imm)
        self.assertEqual([0], module.element_segments[0].function_indices)

    def test_global_initializer_type_mismatch(self):
        builder = ModuleBuilder()
        builder.global_(I32, False, const_expr('i64.const', 1))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_data_without_memory(self):
        with self.assertRaises(MalformedModuleException):
            decode_module(ModuleBuilder().data_segment(0, b'x').build())

    def test_start_function_signature(self):
        builder = add_module()
        builder.start = 0

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_corpus_offsets(self):
        with open(os.path.join(CORPUS_BIN, 'fact_O0.wasm'), 'rb') as module_file:
            data = module_file.read()
        module = decode_module(data)

        for function in module.functions:
            self.assertGreater(function.offset, 8)
            offsets = [instr.offset for instr in function.body]
            self.assertEqual(sorted(offsets), offsets)
            self.assertTrue(all(function.offset <= offset < len(data) for offset in offsets))
            self.assertEqual(0x0b, data[offsets[-1]])


class TestFunctionBody(unittest.TestCase):
    def _body(self, *instructions, locals_=b'\x00'):
        raw = locals_ + code(*instructions) + b'\x0b'
        return decode_function_body(raw, 0, len(raw))

    def test_locals(self):
        raw = vec([uleb(2) + bytes([I32]), uleb(1) + bytes([I64])]) + b'\x0b'
        locals_, body = decode_function_body(raw, 0, len(raw))

        self.assertEqual([(2, 'i32'), (1, 'i64')], locals_)
        self.assertEqual(['end'], [i.name for i in body])

    def test_too_many_locals(self):
        raw = vec([uleb(0xFFFFFFFF) + bytes([I32]), uleb(1) + bytes([I32])]) + b'\x0b'

        with self.assertRaises(MalformedModuleException):
            decode_function_body(raw, 0, len(raw))

    def test_block_targets(self):
        _, body = self._body(
            ins('i32.const', 1),
            ins('if', I32),
            ins('i32.const', 2),
            ins('else'),
            ins('block'),
            ins('br', 0),
            ins('end'),
            ins('i32.const', 3),
            ins('end'),
            ins('drop'),
        )
        names = [i.name for i in body]

        self.assertEqual(['i32.const', 'if', 'i32.const', 'else', 'block', 'br', 'end', 'i32.const', 'end', 'drop',
                          'end'], names)
        self.assertEqual(3, body[1].else_at)
        self.assertEqual(8, body[1].end_at)
        self.assertEqual(8, body[3].end_at)
        self.assertEqual(6, body[4].end_at)
        self.assertEqual(('i32',), body[1].imm)

    def test_immediates(self):
        _, body = self._body(
            ins('i32.const', -1),
            ins('i64.const', -2),
            ins('i32.load', 2, 16),
            ins('br_table', [0, 0], 0),
        )

        self.assertEqual(0xFFFFFFFF, body[0].imm)
        self.assertEqual((1 << 64) - 2, body[1].imm)
        self.assertEqual(MemArg(2, 16), body[2].imm)
        self.assertEqual(((0, 0), 0), tuple(body[3].imm))

    def test_absolute_offsets(self):
        raw = b'\xaa\xbb' + b'\x00' + ins('nop') + b'\x0b'
        _, body = decode_function_body(raw, 2, len(raw) - 2)

        self.assertEqual([3, 4], [i.offset for i in body])

    def test_unknown_opcode(self):
        with self.assertRaises(UnknownOpcodeException) as context:
            self._body(ins('i32.const', 1), ins('i32.extend8_s'), ins('drop'))
        self.assertEqual(0xc0, context.exception.opcode)
        self.assertEqual(3, context.exception.offset)

    def test_missing_end(self):
        raw = b'\x00' + ins('nop')
        with self.assertRaises(MalformedModuleException):
            decode_function_body(raw, 0, len(raw))

    def test_trailing_bytes_after_end(self):
        raw = b'\x00\x0b\x01'
        with self.assertRaises(MalformedModuleException):
            decode_function_body(raw, 0, len(raw))

    def test_unbalanced_else(self):
        with self.assertRaises(MalformedModuleException):
            self._body(ins('block'), ins('else'), ins('end'))

    def test_unknown_label(self):
        with self.assertRaises(MalformedModuleException):
            self._body(ins('block'), ins('br', 2), ins('end'))

    def test_body_exceeds_data(self):
        with self.assertRaises(MalformedModuleException):
            decode_function_body(b'\x00\x0b', 0, 5)

    def test_type_index_block_unsupported(self):
        raw = b'\x00' + bytes([0x02, 0x00]) + b'\x0b\x0b'
        with self.assertRaises(UnsupportedFeatureException):
            decode_function_body(raw, 0, len(raw))


class TestReferences(unittest.TestCase):
    def test_unknown_local(self):
        builder = ModuleBuilder()
        builder.function([I32], [I32], ins('local.get', 1))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_immutable_global_set(self):
        builder = ModuleBuilder()
        builder.global_(I32, False, const_expr('i32.const', 0))
        builder.function([], [], code(ins('i32.const', 1), ins('global.set', 0)))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_memory_instruction_without_memory(self):
        builder = ModuleBuilder()
        builder.function([], [I32], code(ins('i32.const', 0), ins('i32.load')))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_unknown_call_target(self):
        builder = ModuleBuilder()
        builder.function([], [], ins('call', 3))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_call_indirect_without_table(self):
        builder = ModuleBuilder()
        builder.function([], [], code(ins('i32.const', 0), ins('call_indirect', 0)))

        with self.assertRaises(MalformedModuleException):
            decode_module(builder.build())

    def test_float_locals_decode(self):
        builder = ModuleBuilder()
        builder.function([], [], code(ins('f32.const'), ins('drop')), locals_=[(1, F32)])

        module = decode_module(builder.build())
        self.assertEqual(['f32'], module.functions[0].local_types())

    def test_every_decode_error_is_structured(self):
        self.assertTrue(issubclass(MalformedModuleException, DecodeException))
        self.assertTrue(issubclass(UnknownOpcodeException, DecodeException))
