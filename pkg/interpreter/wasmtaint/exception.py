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


class StandardWasmErrors:
    UNKNOWN = 1000
    MALFORMED = 1001
    BAD_MAGIC = 1002
    UNSUPPORTED_VERSION = 1003
    UNKNOWN_OPCODE = 1004
    UNSUPPORTED_FEATURE = 1005
    EXPORT_NOT_FOUND = 2001
    ARITY_MISMATCH = 2002
    TYPE_MISMATCH = 2003
    TRAP = 3000
    MANIFEST = 4001
    CONFIGURATION = 4002


class ExitCodes:
    OK = 0
    TRAP = 1
    USAGE = 2
    IO = 3
    DECODE = 4
    UNSUPPORTED = 5
    INVOCATION = 6
    CORPUS_FAILURE = 7
    SCALING_FAILURE = 8


class TrapReason:
    UNREACHABLE = "unreachable"
    DIVIDE_BY_ZERO = "integer divide by zero"
    INTEGER_OVERFLOW = "integer overflow"
    OUT_OF_BOUNDS = "out of bounds memory access"
    CALL_STACK_EXHAUSTED = "call stack exhausted"
    INDIRECT_TYPE_MISMATCH = "indirect call type mismatch"
    UNINITIALIZED_ELEMENT = "uninitialized element"
    UNDEFINED_ELEMENT = "undefined element"
    TYPE_MISMATCH = "type mismatch"
    STACK_UNDERFLOW = "stack underflow"
    UNSUPPORTED_FLOAT = "unsupported floating-point opcode"
    DATA_SEGMENT_OUT_OF_BOUNDS = "out of bounds data segment"
    ELEMENT_SEGMENT_OUT_OF_BOUNDS = "out of bounds element segment"


class WasmTaintException(Exception):
    def __init__(self, error=StandardWasmErrors.UNKNOWN, reason="", code=ExitCodes.USAGE):
        self.error = error
        self.reason = reason
        self.code = code
        Exception.__init__(self, reason)


class DecodeException(WasmTaintException):
    def __init__(self, error=StandardWasmErrors.MALFORMED, reason="Malformed module", offset=None):
        self.offset = offset
        if offset is not None:
            reason = "{} at byte {:#x}".format(reason, offset)
        WasmTaintException.__init__(self, error, reason, ExitCodes.DECODE)


class MalformedModuleException(DecodeException):
    def __init__(self, reason="Malformed module", offset=None):
        DecodeException.__init__(self, StandardWasmErrors.MALFORMED, reason, offset)


class BadMagicException(DecodeException):
    def __init__(self, reason="Bad magic number"):
        DecodeException.__init__(self, StandardWasmErrors.BAD_MAGIC, reason)


class UnsupportedVersionException(DecodeException):
    def __init__(self, version):
        self.version = version
        DecodeException.__init__(self, StandardWasmErrors.UNSUPPORTED_VERSION,
                                 "Unsupported binary version {}".format(version))


class UnknownOpcodeException(DecodeException):
    def __init__(self, opcode, offset=None):
        self.opcode = opcode
        DecodeException.__init__(self, StandardWasmErrors.UNKNOWN_OPCODE,
                                 "Unknown opcode {:#04x}".format(opcode), offset)


class UnsupportedFeatureException(WasmTaintException):
    def __init__(self, reason="Unsupported feature"):
        WasmTaintException.__init__(self, StandardWasmErrors.UNSUPPORTED_FEATURE, reason, ExitCodes.UNSUPPORTED)


class InvocationException(WasmTaintException):
    def __init__(self, error, reason):
        WasmTaintException.__init__(self, error, reason, ExitCodes.INVOCATION)


class ExportNotFoundException(InvocationException):
    def __init__(self, name):
        self.name = name
        InvocationException.__init__(self, StandardWasmErrors.EXPORT_NOT_FOUND,
                                     "No exported function named '{}'".format(name))


class ArityMismatchException(InvocationException):
    def __init__(self, expected, received):
        InvocationException.__init__(self, StandardWasmErrors.ARITY_MISMATCH,
                                     "Expected {} arguments, received {}".format(expected, received))


class TypeMismatchException(InvocationException):
    def __init__(self, reason="Argument type does not match the function signature"):
        InvocationException.__init__(self, StandardWasmErrors.TYPE_MISMATCH, reason)


class TrapException(WasmTaintException):
    def __init__(self, reason, detail=None):
        self.detail = detail
        self.func_index = None
        self.offset = None
        WasmTaintException.__init__(self, StandardWasmErrors.TRAP, reason, ExitCodes.TRAP)

    def __str__(self):
        message = self.reason if not self.detail else "{}: {}".format(self.reason, self.detail)
        if self.func_index is not None:
            message = "{} (function {}, offset {:#x})".format(message, self.func_index, self.offset)
        return message


class ManifestException(WasmTaintException):
    def __init__(self, reason="Invalid manifest"):
        WasmTaintException.__init__(self, StandardWasmErrors.MANIFEST, reason, ExitCodes.USAGE)


class ConfigurationException(WasmTaintException):
    def __init__(self, reason="Invalid configuration"):
        WasmTaintException.__init__(self, StandardWasmErrors.CONFIGURATION, reason, ExitCodes.USAGE)
