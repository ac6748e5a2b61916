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

from wasmtaint.exception import TrapException, TrapReason
from wasmtaint.model.wasmmodel import MAX_PAGES, PAGE_SIZE
from wasmtaint.taint.labels import EMPTY

logger = logging.getLogger(__name__)


class LinearMemory(object):
    """
    Byte-addressed little-endian memory with one taint label per byte in
    ``shadow``. Both arrays always have the same length.
    """

    def __init__(self, initial_pages=0, max_pages=None):
        self.data = bytearray(initial_pages * PAGE_SIZE)
        self.shadow = [EMPTY] * len(self.data)
        self.max_pages = max_pages
        self.tainted_bytes = 0
        self.peak_tainted_bytes = 0

    def __len__(self):
        return len(self.data)

    @property
    def pages(self):
        return len(self.data) // PAGE_SIZE

    def grow(self, delta):
        """
        Grow by ``delta`` pages. Returns the old page count, or -1 when the
        limit is exceeded or the host cannot allocate the pages, in which
        case data and shadow are left as they were.
        """
        old_pages = self.pages
        new_pages = old_pages + delta
        limit = MAX_PAGES if self.max_pages is None else min(self.max_pages, MAX_PAGES)
        if new_pages > limit:
            return -1
        if delta:
            try:
                data = self.data + bytearray(delta * PAGE_SIZE)
                shadow = self.shadow + [EMPTY] * (delta * PAGE_SIZE)
            except MemoryError:
                logger.warning("cannot allocate {} pages on top of {}".format(delta, old_pages))
                return -1
            self.data, self.shadow = data, shadow
        return old_pages

    def check(self, addr, width):
        if addr + width > len(self.data):
            raise TrapException(TrapReason.OUT_OF_BOUNDS,
                                "access of {} bytes at {} exceeds {}".format(width, addr, len(self.data)))

    def read(self, addr, width):
        self.check(addr, width)
        return int.from_bytes(self.data[addr:addr + width], 'little')

    def write(self, addr, width, value):
        self.check(addr, width)
        self.data[addr:addr + width] = (value & ((1 << (8 * width)) - 1)).to_bytes(width, 'little')

    def write_bytes(self, addr, payload):
        self.check(addr, len(payload))
        self.data[addr:addr + len(payload)] = payload
