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

from wasmtaint.taint.context import on_conditional_branch
from wasmtaint.taint.labels import EMPTY, cap_indirect, merge_direct
from wasmtaint.taint.shadow import memory_load_taint, memory_store_taint


class TaintTracker(object):
    """
    Applies the propagation rules for the runtime. Every label the runtime
    writes to a stack slot, local, global or memory byte comes from here.
    ``context`` arguments are effective context labels, already capped.
    """

    enabled = True

    def __init__(self):
        self.tainted_branches = 0
        self.tainted_addresses = 0

    def stack(self, label, context):
        if context:
            return merge_direct(label, context)
        return label

    def combine(self, a, b, context):
        label = merge_direct(a, b) if b else a
        if context:
            return merge_direct(label, context)
        return label

    def local(self, index, label, context):
        return self.stack(label, context)

    def global_(self, index, label, context):
        return self.stack(label, context)

    def select(self, chosen, condition, context):
        return self.combine(chosen, cap_indirect(condition), context)

    def load(self, memory, addr, width, address_label, context):
        label = memory_load_taint(memory, addr, width)
        if address_label:
            self.tainted_addresses += 1
            label = merge_direct(label, cap_indirect(address_label))
        return self.stack(label, context)

    def store(self, memory, addr, width, value_label, address_label, context):
        label = self.stack(value_label, context)
        if address_label:
            self.tainted_addresses += 1
            label = merge_direct(label, cap_indirect(address_label))
        memory_store_taint(memory, addr, width, label)
        return label

    def branch(self, control, condition, scope):
        if on_conditional_branch(control, condition, scope):
            self.tainted_branches += 1
            return True
        return False

    def call_baseline(self, context, index_label):
        if index_label:
            self.tainted_addresses += 1
            return merge_direct(context, cap_indirect(index_label))
        return context

    def transfer(self, label, baseline):
        if baseline:
            return merge_direct(label, baseline)
        return label


class NullTracker(TaintTracker):
    """Propagation disabled: value layout is unchanged but every label stays empty."""

    enabled = False

    def stack(self, label, context):
        return EMPTY

    def combine(self, a, b, context):
        return EMPTY

    def select(self, chosen, condition, context):
        return EMPTY

    def load(self, memory, addr, width, address_label, context):
        return EMPTY

    def store(self, memory, addr, width, value_label, address_label, context):
        return EMPTY

    def branch(self, control, condition, scope):
        return False

    def call_baseline(self, context, index_label):
        return EMPTY

    def transfer(self, label, baseline):
        return EMPTY


class TracingTracker(TaintTracker):
    """Records the labels written during the current step."""

    def __init__(self):
        super(TracingTracker, self).__init__()
        self.delta = []

    def reset(self):
        del self.delta[:]

    def _record(self, where, label):
        if label:
            self.delta.append((where, label))
        return label

    def stack(self, label, context):
        return self._record('stack', super(TracingTracker, self).stack(label, context))

    def combine(self, a, b, context):
        return self._record('stack', super(TracingTracker, self).combine(a, b, context))

    def local(self, index, label, context):
        return self._record('local[{}]'.format(index), TaintTracker.stack(self, label, context))

    def global_(self, index, label, context):
        return self._record('global[{}]'.format(index), TaintTracker.stack(self, label, context))

    def select(self, chosen, condition, context):
        return self._record('stack', TaintTracker.combine(self, chosen, cap_indirect(condition), context))

    def load(self, memory, addr, width, address_label, context):
        label = memory_load_taint(memory, addr, width)
        if address_label:
            self.tainted_addresses += 1
            label = merge_direct(label, cap_indirect(address_label))
        return self._record('stack', TaintTracker.stack(self, label, context))

    def store(self, memory, addr, width, value_label, address_label, context):
        had_taint = bool(memory.tainted_bytes) and bool(memory_load_taint(memory, addr, width))
        label = TaintTracker.stack(self, value_label, context)
        if address_label:
            self.tainted_addresses += 1
            label = merge_direct(label, cap_indirect(address_label))
        memory_store_taint(memory, addr, width, label)
        if label or had_taint:
            self.delta.append(('mem[{}..{}]'.format(addr, addr + width - 1), label))
        return label

    def branch(self, control, condition, scope):
        tainted = TaintTracker.branch(self, control, condition, scope)
        if tainted:
            self.delta.append(('ctx', scope.effective))
        return tainted

    def transfer(self, label, baseline):
        return self._record('stack', TaintTracker.transfer(self, label, baseline))
