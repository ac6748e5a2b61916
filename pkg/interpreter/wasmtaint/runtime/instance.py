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
from collections import namedtuple

from wasmtaint.decoder import opcodes
from wasmtaint.exception import (ArityMismatchException, ExportNotFoundException, TrapException, TrapReason,
                                 TypeMismatchException, WasmTaintException)
from wasmtaint.metrics import execution_metrics
from wasmtaint.model.wasmmodel import I32, I64
from wasmtaint.runtime.frames import BLOCK, FUNCTION, IF, LOOP, ControlScope, Frame
from wasmtaint.runtime.memory import LinearMemory
from wasmtaint.runtime.numeric import NUMERIC_OPS, exec_numeric
from wasmtaint.runtime.values import MASK_32, MASKS, Value, zero
from wasmtaint.taint.labels import EMPTY, cap_indirect, merge_direct
from wasmtaint.taint.report import make_report
from wasmtaint.taint.tracker import NullTracker, TaintTracker, TracingTracker

logger = logging.getLogger(__name__)

DEFAULT_MAX_CALL_DEPTH = 10000

RUNNING = 'running'
FINISHED = 'finished'
TRAPPED = 'trapped'

TraceRecord = namedtuple('TraceRecord', 'step func_index offset opcode depth delta stack')

# name -> (result type, width in bytes, sign-extend)
LOADS = {
    'i32.load': (I32, 4, False),
    'i64.load': (I64, 8, False),
    'i32.load8_s': (I32, 1, True),
    'i32.load8_u': (I32, 1, False),
    'i32.load16_s': (I32, 2, True),
    'i32.load16_u': (I32, 2, False),
    'i64.load8_s': (I64, 1, True),
    'i64.load8_u': (I64, 1, False),
    'i64.load16_s': (I64, 2, True),
    'i64.load16_u': (I64, 2, False),
    'i64.load32_s': (I64, 4, True),
    'i64.load32_u': (I64, 4, False),
}

# name -> (operand type, width in bytes)
STORES = {
    'i32.store': (I32, 4),
    'i64.store': (I64, 8),
    'i32.store8': (I32, 1),
    'i32.store16': (I32, 2),
    'i64.store8': (I64, 1),
    'i64.store16': (I64, 2),
    'i64.store32': (I64, 4),
}


class Instance(object):
    """
    Runtime state of one instantiated module: value stack, call frames,
    globals, table and linear memory with its shadow labels.

    An instance is single-threaded. Memory and globals persist across
    invocations; the stacks are reset by each invoke.
    """

    def __init__(self, module, max_call_depth=DEFAULT_MAX_CALL_DEPTH, propagate=True, tracer=None,
                 show_stack=False):
        self.module = module
        self.max_call_depth = max_call_depth
        self.tracer = tracer
        self.show_stack = show_stack
        if tracer is not None:
            self.tracker = TracingTracker() if propagate else NullTracker()
        else:
            self.tracker = TaintTracker() if propagate else NullTracker()

        if module.memories:
            limits = module.memories[0].limits
            self.memory = LinearMemory(limits.minimum, limits.maximum)
        else:
            self.memory = LinearMemory(0, 0)
        self.globals = [Value(g.vtype, g.init.imm, EMPTY) for g in module.globals]
        self.table = [None] * module.tables[0].limits.minimum if module.tables else []

        self.stack = []
        self.frames = []
        self.taint_sources = []
        self.status = FINISHED
        self.trap = None
        self.steps = 0
        self.calls = 0
        self.max_depth = 0
        self.metrics = execution_metrics()
        self._locals_templates = {}

    def __repr__(self):
        return "Instance(status={}, frames={}, stack={}, memory={} bytes)".format(
            self.status, len(self.frames), len(self.stack), len(self.memory))

    def initialize(self):
        """Copy element and data segments, then run the start function."""
        placements = []
        for segment in self.module.element_segments:
            offset = segment.offset.imm
            if offset + len(segment.function_indices) > len(self.table):
                raise TrapException(TrapReason.ELEMENT_SEGMENT_OUT_OF_BOUNDS,
                                    "{} entries at {}".format(len(segment.function_indices), offset))
            placements.append((offset, segment.function_indices))
        for segment in self.module.data_segments:
            offset = segment.offset.imm
            if offset + len(segment.data) > len(self.memory):
                raise TrapException(TrapReason.DATA_SEGMENT_OUT_OF_BOUNDS,
                                    "{} bytes at {}".format(len(segment.data), offset))
        for offset, function_indices in placements:
            self.table[offset:offset + len(function_indices)] = function_indices
        for segment in self.module.data_segments:
            self.memory.write_bytes(segment.offset.imm, segment.data)

        if self.module.start is not None:
            logger.debug("running start function {}".format(self.module.start))
            self._begin([])
            self.exec_call(self.module.start)
            self.run()
        logger.debug("instantiated {}".format(self))
        return self

    def statistics(self):
        return self.metrics.as_dict()

    def invoke(self, name, args):
        """
        Call the exported function ``name`` with ``args`` and run it to
        completion.

        :return: tuple of (result values, TaintReport)
        """
        func_index = self.module.exported_function(name)
        if func_index is None:
            raise ExportNotFoundException(name)
        func_type = self.module.function_type(func_index)
        if len(args) != len(func_type.params):
            raise ArityMismatchException(len(func_type.params), len(args))
        for position, (arg, expected) in enumerate(zip(args, func_type.params)):
            if arg.vtype != expected:
                raise TypeMismatchException("argument {} of '{}' must be {}, got {}".format(
                    position, name, expected, arg.vtype))

        self._begin(args)
        logger.debug("invoking '{}' (function {}) with {}".format(name, func_index, [str(a) for a in args]))
        try:
            self.exec_call(func_index)
            self.run()
        except TrapException as trap:
            self._flush_metrics()
            trap.report = make_report(self, [])
            raise
        results = list(self.stack[len(self.stack) - len(func_type.results):])
        self._flush_metrics()
        self.metrics.print_metrics(logger)
        return results, make_report(self, results)

    def _begin(self, args):
        self.stack = list(args)
        self.frames = []
        self.trap = None
        self.status = RUNNING
        self.taint_sources = sorted({source for arg in args for source in arg.taint})
        self.steps = 0
        self.calls = 0
        self.max_depth = 0
        self.tracker.tainted_branches = 0
        self.tracker.tainted_addresses = 0
        self.memory.peak_tainted_bytes = self.memory.tainted_bytes

    def _flush_metrics(self):
        self.metrics.reset()
        self.metrics.record_metrics(
            instructions=self.steps,
            calls=self.calls,
            max_call_depth=self.max_depth,
            tainted_branches=self.tracker.tainted_branches,
            tainted_addresses=self.tracker.tainted_addresses,
            peak_shadow_labels=self.memory.peak_tainted_bytes,
        )

    def step(self):
        """Execute exactly one instruction of the innermost frame."""
        if self.status != RUNNING:
            raise WasmTaintException(reason="instance is {}, not running".format(self.status))
        frame = self.frames[-1]
        instr = frame.code[frame.cursor]
        frame.cursor += 1
        if self.tracer is not None:
            self.tracker.reset()
        try:
            _DISPATCH[instr.opcode](self, frame, instr)
        except TrapException as trap:
            self._trapped(trap, frame, instr)
            raise
        self.steps += 1
        if self.tracer is not None:
            self.tracer(TraceRecord(self.steps, frame.func_index, instr.offset, instr.name, len(self.stack),
                                    list(self.tracker.delta), tuple(self.stack) if self.show_stack else None))
        return self.status

    def run(self):
        if self.tracer is not None:
            while self.status == RUNNING:
                self.step()
            return self.status

        frames = self.frames
        dispatch = _DISPATCH
        steps = 0
        frame = instr = None
        try:
            while frames:
                frame = frames[-1]
                instr = frame.code[frame.cursor]
                frame.cursor += 1
                dispatch[instr.opcode](self, frame, instr)
                steps += 1
        except TrapException as trap:
            self._trapped(trap, frame, instr)
            raise
        finally:
            self.steps += steps
        return self.status

    def _trapped(self, trap, frame, instr):
        self.status = TRAPPED
        self.trap = trap
        if trap.func_index is None and frame is not None:
            trap.func_index = frame.func_index
            trap.offset = instr.offset
        logger.info("trap: {}".format(trap))

    def exec_call(self, func_index, index_label=None):
        """Push a frame for ``func_index``, taking its arguments from the value stack."""
        frames = self.frames
        if len(frames) >= self.max_call_depth:
            raise TrapException(TrapReason.CALL_STACK_EXHAUSTED, "depth limit {}".format(self.max_call_depth))
        module = self.module
        func = module.functions[func_index]
        func_type = module.types[func.type_index]
        stack = self.stack
        count = len(func_type.params)
        floor = frames[-1].height if frames else 0
        if len(stack) - count < floor:
            raise TrapException(TrapReason.STACK_UNDERFLOW, "call to function {}".format(func_index))
        args = stack[len(stack) - count:]
        for arg, expected in zip(args, func_type.params):
            if arg.vtype != expected:
                raise TrapException(TrapReason.TYPE_MISMATCH, "argument of function {}".format(func_index))
        del stack[len(stack) - count:]

        template = self._locals_templates.get(func_index)
        if template is None:
            template = self._locals_templates[func_index] = [zero(t) for t in func.local_types()]
        context = frames[-1].control.effective if frames else EMPTY
        baseline = self.tracker.call_baseline(context, index_label)
        frames.append(Frame(func_index, func.body, args + template, len(func_type.results), len(stack), baseline))
        self.calls += 1
        if len(frames) > self.max_depth:
            self.max_depth = len(frames)

    def exec_return(self, frame, carried=EMPTY):
        """Pop ``frame``; its results leave under the context they were returned from, plus ``carried``."""
        stack = self.stack
        arity = frame.arity
        if len(stack) - arity < frame.height:
            raise TrapException(TrapReason.STACK_UNDERFLOW, "return from function {}".format(frame.func_index))
        results = stack[len(stack) - arity:] if arity else []
        del stack[frame.height:]
        self.frames.pop()
        outgoing = merge_direct(frame.control.effective, carried) if carried else frame.control.effective
        for value in results:
            stack.append(Value(value.vtype, value.bits, self.tracker.transfer(value.taint, outgoing)))
        if not self.frames:
            self.status = FINISHED

    def exec_branch(self, depth, conditional=False, condition=None, selector=None):
        """
        Branch to the scope ``depth`` levels out. A conditional branch is
        taken iff ``condition`` is non-zero; its label taints the innermost
        scope either way. A ``br_table`` ``selector`` taints the scope
        execution continues in. Values carried to the target pick up the
        context they leave and the capped condition or selector label.

        :return: True when the branch was taken
        """
        frame = self.frames[-1]
        control = frame.control
        carried = EMPTY
        if conditional:
            self.tracker.branch(control, condition.taint, control.innermost)
            if not condition.bits:
                return False
            carried = cap_indirect(condition.taint)
        if selector is not None and selector.taint:
            carried = merge_direct(carried, cap_indirect(selector.taint))
        scopes = control.scopes
        index = len(scopes) - 1 - depth
        scope = scopes[index]
        if scope.kind == FUNCTION:
            if selector is not None:
                self.tracker.branch(control, selector.taint, control.innermost)
            self.exec_return(frame, carried)
            return True
        stack = self.stack
        arity = 0 if scope.kind == LOOP else scope.arity
        if len(stack) - arity < scope.height:
            raise TrapException(TrapReason.STACK_UNDERFLOW, "branch to depth {}".format(depth))
        if arity:
            outgoing = merge_direct(control.effective, carried)
            results = [Value(value.vtype, value.bits, self.tracker.transfer(value.taint, outgoing))
                       for value in stack[len(stack) - arity:]]
            del stack[scope.height:]
            stack.extend(results)
        else:
            del stack[scope.height:]
        if scope.kind == LOOP:
            control.unwind(index + 1)
        else:
            control.unwind(index)
        if selector is not None:
            self.tracker.branch(control, selector.taint, control.innermost)
        frame.cursor = scope.target
        return True

    def exec_memory_access(self, op, offset, addr, value=None):
        """
        Perform the load or store ``op`` at ``addr`` + ``offset``. Alignment
        hints are ignored; bounds are always checked.

        :return: the loaded Value, or None for stores
        """
        memory = self.memory
        context = self.frames[-1].control.effective if self.frames else EMPTY
        if addr.vtype != I32:
            raise TrapException(TrapReason.TYPE_MISMATCH, "{} address must be i32".format(op))
        effective_address = addr.bits + offset
        if op in LOADS:
            vtype, width, sign_extend = LOADS[op]
            raw = memory.read(effective_address, width)
            if sign_extend and raw >> (8 * width - 1):
                raw -= 1 << (8 * width)
            label = self.tracker.load(memory, effective_address, width, addr.taint, context)
            return Value(vtype, raw & MASKS[vtype], label)
        vtype, width = STORES[op]
        if value.vtype != vtype:
            raise TrapException(TrapReason.TYPE_MISMATCH, "{} expects {}, got {}".format(op, vtype, value.vtype))
        memory.write(effective_address, width, value.bits)
        self.tracker.store(memory, effective_address, width, value.taint, addr.taint, context)
        return None

    def memory_grow(self, delta):
        """Grow memory by ``delta`` pages; the result is the old page count or -1."""
        context = self.frames[-1].control.effective if self.frames else EMPTY
        previous = self.memory.grow(delta.bits)
        return Value(I32, previous & MASK_32, self.tracker.combine(EMPTY, cap_indirect(delta.taint), context))


def instantiate(module, max_call_depth=DEFAULT_MAX_CALL_DEPTH, propagate=True, tracer=None, show_stack=False):
    """Build an Instance for ``module``, place its segments and run its start function."""
    instance = Instance(module, max_call_depth=max_call_depth, propagate=propagate, tracer=tracer,
                        show_stack=show_stack)
    return instance.initialize()


def invoke(instance, name, args):
    return instance.invoke(name, args)


def step(instance):
    return instance.step()


def exec_branch(instance, depth, conditional=False, condition=None, selector=None):
    return instance.exec_branch(depth, conditional, condition, selector)


def exec_call(instance, callee, index_label=None):
    return instance.exec_call(callee, index_label)


def exec_memory_access(instance, op, offset, addr, value=None):
    return instance.exec_memory_access(op, offset, addr, value)


def memory_grow(instance, delta):
    return instance.memory_grow(delta)


# Instruction handlers. Each takes (instance, frame, instr) with the
# frame's cursor already past instr.

def _pop(stack, frame):
    if len(stack) <= frame.height:
        raise TrapException(TrapReason.STACK_UNDERFLOW)
    return stack.pop()


def _pop_i32(stack, frame):
    value = _pop(stack, frame)
    if value.vtype != I32:
        raise TrapException(TrapReason.TYPE_MISMATCH, "expected i32, got {}".format(value.vtype))
    return value


def _unreachable(instance, frame, instr):
    raise TrapException(TrapReason.UNREACHABLE)


def _nop(instance, frame, instr):
    pass


def _block(instance, frame, instr):
    frame.control.push(ControlScope(BLOCK, instr.end_at + 1, len(instance.stack), len(instr.imm)))


def _loop(instance, frame, instr):
    frame.control.push(ControlScope(LOOP, frame.cursor, len(instance.stack), len(instr.imm)))


def _if(instance, frame, instr):
    condition = _pop_i32(instance.stack, frame)
    scope = frame.control.push(ControlScope(IF, instr.end_at + 1, len(instance.stack), len(instr.imm)))
    instance.tracker.branch(frame.control, condition.taint, scope)
    if not condition.bits:
        if instr.else_at is not None:
            frame.cursor = instr.else_at + 1
        else:
            frame.control.pop()
            frame.cursor = instr.end_at + 1


def _else(instance, frame, instr):
    # reached only by falling out of the then-branch
    instance.exec_branch(0)


def _end(instance, frame, instr):
    if frame.control.innermost.kind == FUNCTION:
        instance.exec_return(frame)
    else:
        frame.control.pop()


def _br(instance, frame, instr):
    instance.exec_branch(instr.imm)


def _br_if(instance, frame, instr):
    instance.exec_branch(instr.imm, True, _pop_i32(instance.stack, frame))


def _br_table(instance, frame, instr):
    index = _pop_i32(instance.stack, frame)
    depths = instr.imm.depths
    instance.exec_branch(depths[index.bits] if index.bits < len(depths) else instr.imm.default, selector=index)


def _return(instance, frame, instr):
    instance.exec_return(frame)


def _call(instance, frame, instr):
    instance.exec_call(instr.imm)


def _call_indirect(instance, frame, instr):
    index = _pop_i32(instance.stack, frame)
    table = instance.table
    if index.bits >= len(table):
        raise TrapException(TrapReason.UNDEFINED_ELEMENT, "table index {}".format(index.bits))
    func_index = table[index.bits]
    if func_index is None:
        raise TrapException(TrapReason.UNINITIALIZED_ELEMENT, "table index {}".format(index.bits))
    module = instance.module
    if module.function_type(func_index) != module.types[instr.imm.type_index]:
        raise TrapException(TrapReason.INDIRECT_TYPE_MISMATCH, "table index {}".format(index.bits))
    instance.exec_call(func_index, index.taint)


def _drop(instance, frame, instr):
    _pop(instance.stack, frame)


def _select(instance, frame, instr):
    stack = instance.stack
    condition = _pop_i32(stack, frame)
    second = _pop(stack, frame)
    first = _pop(stack, frame)
    if first.vtype != second.vtype:
        raise TrapException(TrapReason.TYPE_MISMATCH, "select operands differ")
    chosen = first if condition.bits else second
    stack.append(Value(chosen.vtype, chosen.bits,
                       instance.tracker.select(chosen.taint, condition.taint, frame.control.effective)))


def _local_get(instance, frame, instr):
    value = frame.locals[instr.imm]
    instance.stack.append(Value(value.vtype, value.bits,
                                instance.tracker.stack(value.taint, frame.control.effective)))


def _set_local(instance, frame, index, value):
    if value.vtype != frame.locals[index].vtype:
        raise TrapException(TrapReason.TYPE_MISMATCH, "local {} is {}".format(index, frame.locals[index].vtype))
    frame.locals[index] = Value(value.vtype, value.bits,
                                instance.tracker.local(index, value.taint, frame.control.effective))


def _local_set(instance, frame, instr):
    _set_local(instance, frame, instr.imm, _pop(instance.stack, frame))


def _local_tee(instance, frame, instr):
    stack = instance.stack
    if len(stack) <= frame.height:
        raise TrapException(TrapReason.STACK_UNDERFLOW)
    _set_local(instance, frame, instr.imm, stack[-1])


def _global_get(instance, frame, instr):
    value = instance.globals[instr.imm]
    instance.stack.append(Value(value.vtype, value.bits,
                                instance.tracker.stack(value.taint, frame.control.effective)))


def _global_set(instance, frame, instr):
    value = _pop(instance.stack, frame)
    current = instance.globals[instr.imm]
    if value.vtype != current.vtype:
        raise TrapException(TrapReason.TYPE_MISMATCH, "global {} is {}".format(instr.imm, current.vtype))
    instance.globals[instr.imm] = Value(value.vtype, value.bits,
                                        instance.tracker.global_(instr.imm, value.taint, frame.control.effective))


def _load(instance, frame, instr):
    stack = instance.stack
    addr = _pop(stack, frame)
    stack.append(instance.exec_memory_access(instr.name, instr.imm.offset, addr))


def _store(instance, frame, instr):
    stack = instance.stack
    value = _pop(stack, frame)
    addr = _pop(stack, frame)
    instance.exec_memory_access(instr.name, instr.imm.offset, addr, value)


def _memory_size(instance, frame, instr):
    instance.stack.append(Value(I32, instance.memory.pages,
                                instance.tracker.stack(EMPTY, frame.control.effective)))


def _memory_grow(instance, frame, instr):
    stack = instance.stack
    stack.append(instance.memory_grow(_pop_i32(stack, frame)))


def _const(instance, frame, instr):
    instance.stack.append(Value(instr.name[:3], instr.imm, instance.tracker.stack(EMPTY, frame.control.effective)))


def _unsupported_float(instance, frame, instr):
    raise TrapException(TrapReason.UNSUPPORTED_FLOAT, instr.name)


def _numeric(operand_count):
    def handler(instance, frame, instr):
        stack = instance.stack
        start = len(stack) - operand_count
        if start < frame.height:
            raise TrapException(TrapReason.STACK_UNDERFLOW, instr.name)
        result = exec_numeric(instr.name, stack[start:])
        del stack[start:]
        stack.append(Value(result.vtype, result.bits, instance.tracker.stack(result.taint, frame.control.effective)))
    return handler


def _build_dispatch():
    named = {
        'unreachable': _unreachable, 'nop': _nop, 'block': _block, 'loop': _loop, 'if': _if, 'else': _else,
        'end': _end, 'br': _br, 'br_if': _br_if, 'br_table': _br_table, 'return': _return, 'call': _call,
        'call_indirect': _call_indirect, 'drop': _drop, 'select': _select, 'local.get': _local_get,
        'local.set': _local_set, 'local.tee': _local_tee, 'global.get': _global_get, 'global.set': _global_set,
        'memory.size': _memory_size, 'memory.grow': _memory_grow, 'i32.const': _const, 'i64.const': _const,
    }
    dispatch = [None] * 256
    for code, (name, _) in opcodes.OPCODES.items():
        if name in named:
            handler = named[name]
        elif code in opcodes.FLOAT_OPCODES:
            handler = _unsupported_float
        elif name in LOADS:
            handler = _load
        elif name in STORES:
            handler = _store
        else:
            handler = _numeric(len(NUMERIC_OPS[name].params))
        dispatch[code] = handler
    return dispatch


_DISPATCH = _build_dispatch()
