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

from wasmtaint.taint.labels import EMPTY, cap_indirect, merge_direct


class ControlContext(object):
    """
    The control scopes of one frame, each carrying the capped label of the
    tainted conditions it executes under. ``baseline`` is the context the
    frame was called under, so the innermost scope's cumulative label is
    the effective context across all active frames.
    """

    __slots__ = ('baseline', 'scopes')

    def __init__(self, baseline=EMPTY):
        self.baseline = baseline
        self.scopes = []

    @property
    def effective(self):
        return self.scopes[-1].effective if self.scopes else self.baseline

    @property
    def innermost(self):
        return self.scopes[-1]

    def __len__(self):
        return len(self.scopes)

    def push(self, scope):
        scope.effective = merge_direct(self.effective, scope.context_taint)
        self.scopes.append(scope)
        return scope

    def pop(self):
        return self.scopes.pop()

    def unwind(self, height):
        del self.scopes[height:]

    def taint(self, scope, label):
        capped = cap_indirect(label)
        scope.context_taint = merge_direct(scope.context_taint, capped)
        position = self.scopes.index(scope) if scope is not self.scopes[-1] else len(self.scopes) - 1
        for nested in self.scopes[position:]:
            nested.effective = merge_direct(nested.effective, capped)


def on_conditional_branch(context, condition_label, target_scope):
    """
    Record a conditional branch on ``condition_label``. The scope whose
    remaining instructions depend on the outcome keeps the capped label
    until it is exited.

    :return: True when the condition was tainted
    """
    if not condition_label:
        return False
    context.taint(target_scope, condition_label)
    return True
