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

from collections import namedtuple
from dataclasses import dataclass, field
from typing import Dict, List, Optional

I32 = 'i32'
I64 = 'i64'
F32 = 'f32'
F64 = 'f64'

VALUE_TYPES = {0x7f: I32, 0x7e: I64, 0x7d: F32, 0x7c: F64}
INTEGER_TYPES = (I32, I64)

FUNC_REF = 0x70

EXTERNAL_FUNC = 'func'
EXTERNAL_TABLE = 'table'
EXTERNAL_MEMORY = 'memory'
EXTERNAL_GLOBAL = 'global'
EXTERNAL_KINDS = (EXTERNAL_FUNC, EXTERNAL_TABLE, EXTERNAL_MEMORY, EXTERNAL_GLOBAL)

PAGE_SIZE = 65536
MAX_PAGES = 65536

Limits = namedtuple('Limits', 'minimum maximum')
Export = namedtuple('Export', 'kind index')
Memory = namedtuple('Memory', 'limits')
Table = namedtuple('Table', 'element_type limits')
Global = namedtuple('Global', 'vtype mutable init')
DataSegment = namedtuple('DataSegment', 'memory_index offset data')
ElementSegment = namedtuple('ElementSegment', 'table_index offset function_indices')

# One decoded instruction. else_at/end_at are cursor indexes into the
# owning body, filled for block/loop/if (else_at for if only).
Instr = namedtuple('Instr', 'opcode name imm offset else_at end_at')
MemArg = namedtuple('MemArg', 'align offset')
BrTable = namedtuple('BrTable', 'depths default')
CallIndirect = namedtuple('CallIndirect', 'type_index table_index')


@dataclass(frozen=True)
class FuncType:
    params: tuple = ()
    results: tuple = ()

    def __str__(self):
        return "({}) -> ({})".format(", ".join(self.params), ", ".join(self.results))


@dataclass
class Function:
    """
    A function from the code section joined with its function-section type.

    :attribute type_index: index into ModuleDef.types
    :attribute locals: declared locals as (count, value type) runs, not
        including parameters
    :attribute body: decoded instruction sequence ending with ``end``
    :attribute offset: absolute byte offset of the body in the binary
    """
    type_index: int
    locals: List[tuple] = field(default_factory=list)
    body: List[Instr] = field(default_factory=list)
    offset: int = 0

    def local_types(self):
        types = []
        for count, vtype in self.locals:
            types.extend([vtype] * count)
        return types


@dataclass
class ModuleDef:
    """
    Static image of a decoded wasm binary. Instances never mutate it, so a
    single ModuleDef can back any number of instances.

    :attribute types: list of FuncType
    :attribute functions: list of Function, in index order
    :attribute exports: dict of export name to Export(kind, index)
    :attribute memories: list of Memory, at most one
    :attribute data_segments: list of DataSegment
    :attribute tables: list of Table, at most one
    :attribute element_segments: list of ElementSegment
    :attribute globals: list of Global
    :attribute start: optional index of the start function
    :attribute custom_sections: names of skipped custom sections
    :attribute version: binary format version from the header
    """
    types: List[FuncType] = field(default_factory=list)
    functions: List[Function] = field(default_factory=list)
    exports: Dict[str, Export] = field(default_factory=dict)
    memories: List[Memory] = field(default_factory=list)
    data_segments: List[DataSegment] = field(default_factory=list)
    tables: List[Table] = field(default_factory=list)
    element_segments: List[ElementSegment] = field(default_factory=list)
    globals: List[Global] = field(default_factory=list)
    start: Optional[int] = None
    custom_sections: List[str] = field(default_factory=list)
    version: int = 1

    def function_type(self, func_index):
        return self.types[self.functions[func_index].type_index]

    def exported_function(self, name):
        export = self.exports.get(name)
        if export is None or export.kind != EXTERNAL_FUNC:
            return None
        return export.index

    def get_summary(self):
        return {
            'types': len(self.types),
            'functions': len(self.functions),
            'exports': sorted(self.exports),
            'memories': [tuple(m.limits) for m in self.memories],
            'tables': [tuple(t.limits) for t in self.tables],
            'globals': len(self.globals),
            'data_segments': len(self.data_segments),
            'element_segments': len(self.element_segments),
            'start': self.start,
            'custom_sections': list(self.custom_sections),
        }

    def __str__(self):
        return str(self.get_summary())
