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

import unittest

import mock

from wasmtaint.exception import TrapException, TrapReason
from wasmtaint.model.wasmmodel import PAGE_SIZE
from wasmtaint.runtime.memory import LinearMemory
from wasmtaint.taint.labels import EMPTY, TaintLabel
from wasmtaint.taint.shadow import memory_load_taint, memory_store_taint


class TestLinearMemory(unittest.TestCase):
    def test_little_endian(self):
        memory = LinearMemory(1)
        memory.write(0, 4, 0x01020304)

        self.assertEqual(b'\x04\x03\x02\x01', bytes(memory.data[:4]))
        self.assertEqual(0x0304, memory.read(0, 2))

    def test_write_truncates_to_width(self):
        memory = LinearMemory(1)
        memory.write(0, 1, 0x1FF)

        self.assertEqual(0xFF, memory.read(0, 1))
        self.assertEqual(0, memory.read(1, 1))

    def test_bounds(self):
        memory = LinearMemory(1)
        memory.read(PAGE_SIZE - 4, 4)

        with self.assertRaises(TrapException) as raised:
            memory.read(PAGE_SIZE - 3, 4)
        self.assertEqual(TrapReason.OUT_OF_BOUNDS, raised.exception.reason)
        with self.assertRaises(TrapException):
            memory.write(PAGE_SIZE, 1, 0)

    def test_no_memory(self):
        memory = LinearMemory(0, 0)

        self.assertEqual(0, len(memory))
        self.assertEqual(-1, memory.grow(1))
        with self.assertRaises(TrapException):
            memory.read(0, 1)

    def test_grow_keeps_shadow_in_step(self):
        memory = LinearMemory(1, 3)

        self.assertEqual(1, memory.grow(2))
        self.assertEqual(3, memory.pages)
        self.assertEqual(len(memory.data), len(memory.shadow))
        self.assertEqual(-1, memory.grow(1))
        self.assertEqual(3, memory.grow(0))

    def test_grown_pages_are_clean(self):
        memory = LinearMemory(1)
        memory_store_taint(memory, PAGE_SIZE - 2, 2, TaintLabel.direct(0))
        memory.grow(1)

        self.assertEqual(EMPTY, memory_load_taint(memory, PAGE_SIZE, 16))
        self.assertEqual(0, memory.read(PAGE_SIZE, 4))
        self.assertEqual(2, memory.tainted_bytes)

    def test_grow_without_host_memory(self):
        memory = LinearMemory(1)
        memory.write(8, 4, 0xCAFE)
        memory_store_taint(memory, 8, 4, TaintLabel.direct(0))

        with mock.patch('wasmtaint.runtime.memory.bytearray', side_effect=MemoryError, create=True):
            self.assertEqual(-1, memory.grow(4000))

        self.assertEqual(1, memory.pages)
        self.assertEqual(PAGE_SIZE, len(memory.shadow))
        self.assertEqual(0xCAFE, memory.read(8, 4))
        self.assertEqual(TaintLabel.direct(0), memory_load_taint(memory, 8, 4))
        self.assertEqual(1, memory.grow(1))

    def test_write_bytes(self):
        memory = LinearMemory(1)
        memory.write_bytes(1024, b'\x11\x22')

        self.assertEqual(0x2211, memory.read(1024, 2))
        with self.assertRaises(TrapException):
            memory.write_bytes(PAGE_SIZE - 1, b'\x00\x00')
