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

from wasmtaint.taint.context import ControlContext
from wasmtaint.taint.labels import EMPTY

BLOCK = 'block'
LOOP = 'loop'
IF = 'if'
FUNCTION = 'function'


class ControlScope(object):
    """
    An active block, loop, if or function body. ``target`` is the cursor a
    branch to this scope continues at: the loop head for loops, just past
    the matching end otherwise.
    """

    __slots__ = ('kind', 'target', 'height', 'arity', 'context_taint', 'effective')

    def __init__(self, kind, target, height, arity, context_taint=EMPTY):
        self.kind = kind
        self.target = target
        self.height = height
        self.arity = arity
        self.context_taint = context_taint
        self.effective = context_taint

    def __repr__(self):
        return "ControlScope({}, target={}, height={}, arity={}, context={!r})".format(
            self.kind, self.target, self.height, self.arity, self.context_taint)


class Frame(object):
    __slots__ = ('func_index', 'code', 'locals', 'arity', 'cursor', 'control', 'height')

    def __init__(self, func_index, code, locals_, arity, height, baseline=EMPTY):
        self.func_index = func_index
        self.code = code
        self.locals = locals_
        self.arity = arity
        self.cursor = 0
        self.height = height
        self.control = ControlContext(baseline)
        self.control.push(ControlScope(FUNCTION, len(code), height, arity))

    @property
    def baseline(self):
        return self.control.baseline
