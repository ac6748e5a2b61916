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

from wasmtaint.exception import MalformedModuleException

MAX_LEB128_BYTES = 10


def decode_uleb128(data, offset=0):
    """
    Decode an unsigned LEB128 integer starting at ``offset``.

    :return: tuple of (value, number of bytes consumed)
    """
    result = shift = 0
    position = offset
    end = min(len(data), offset + MAX_LEB128_BYTES)
    while position < end:
        b = data[position]
        position += 1
        result |= (b & 0x7f) << shift
        shift += 7
        if not (b & 0x80):
            if result >> 64:
                raise MalformedModuleException("integer too large", offset)
            return result, position - offset
    if position >= len(data):
        raise MalformedModuleException("unexpected end of LEB128 integer", offset)
    raise MalformedModuleException("integer representation too long", offset)


def decode_sleb128(data, offset=0):
    """
    Decode a signed LEB128 integer starting at ``offset``, sign-extending
    from the last group.

    :return: tuple of (value, number of bytes consumed)
    """
    result = shift = 0
    position = offset
    end = min(len(data), offset + MAX_LEB128_BYTES)
    while position < end:
        b = data[position]
        position += 1
        result |= (b & 0x7f) << shift
        shift += 7
        if not (b & 0x80):
            if b & 0x40:
                result |= (~0 << shift)
            if not -(1 << 63) <= result < (1 << 63):
                raise MalformedModuleException("integer too large", offset)
            return result, position - offset
    if position >= len(data):
        raise MalformedModuleException("unexpected end of LEB128 integer", offset)
    raise MalformedModuleException("integer representation too long", offset)
