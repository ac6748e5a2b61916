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

from wasmtaint.taint.labels import EMPTY, merge_direct


def memory_store_taint(memory, addr, width, label):
    """Overwrite the shadow labels of ``width`` bytes at ``addr`` with ``label``."""
    shadow = memory.shadow
    end = addr + width
    if memory.tainted_bytes:
        cleared = sum(1 for old in shadow[addr:end] if old)
    elif not label:
        return
    else:
        cleared = 0
    shadow[addr:end] = [label] * width
    memory.tainted_bytes += (width if label else 0) - cleared
    if memory.tainted_bytes > memory.peak_tainted_bytes:
        memory.peak_tainted_bytes = memory.tainted_bytes


def memory_load_taint(memory, addr, width):
    """Union of the shadow labels of ``width`` bytes at ``addr``."""
    if not memory.tainted_bytes:
        return EMPTY
    label = EMPTY
    for byte_label in memory.shadow[addr:addr + width]:
        if byte_label:
            label = merge_direct(label, byte_label)
    return label
