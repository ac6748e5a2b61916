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

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import List, Optional

from wasmtaint import __version__
from wasmtaint.configuration import get_float, get_int, inject_args_in_config, load_config
from wasmtaint.decoder.decoder import decode_module
from wasmtaint.exception import ConfigurationException, ExitCodes, TrapException, WasmTaintException
from wasmtaint.harness.bench import TAINTED, run_bench, write_bench_csv
from wasmtaint.harness.corpus import run_corpus
from wasmtaint.harness.manifest import load_bench_manifest, load_manifest
from wasmtaint.harness.scaling import DEFAULT_TRANSFER_RATIO, check_constant_transfer, check_scaling
from wasmtaint.runtime.instance import DEFAULT_MAX_CALL_DEPTH, instantiate
from wasmtaint.runtime.values import parse_literal
from wasmtaint.taint.labels import EMPTY, TaintLabel

logger = logging.getLogger(__name__)

REPORT_FORMATS = ('json', 'text')


@dataclass
class RunConfig:
    """
    One ``run`` or ``trace`` request. ``args`` are typed literals such as
    ``i32:5``; ``taint`` lists the argument positions that are sources.
    """
    module: str
    invoke: str
    args: List[str] = field(default_factory=list)
    taint: List[int] = field(default_factory=list)
    report: str = 'json'
    trace: bool = False
    show_stack: bool = False
    max_depth: Optional[int] = None

    def arguments(self):
        for index in self.taint:
            if not 0 <= index < len(self.args):
                raise WasmTaintException(reason="taint index {} out of range for {} arguments".format(
                    index, len(self.args)), code=ExitCodes.USAGE)
        try:
            return [parse_literal(text, TaintLabel.direct(i) if i in self.taint else EMPTY)
                    for i, text in enumerate(self.args)]
        except ValueError as e:
            raise WasmTaintException(reason=str(e), code=ExitCodes.USAGE)


def _split(text):
    return [item.strip() for item in text.split(',') if item.strip()] if text else []


def _indices(text):
    try:
        return [int(item) for item in _split(text)]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated argument positions, got '{}'".format(text))


def read_module(path):
    try:
        with open(path, 'rb') as module_file:
            data = module_file.read()
    except OSError as e:
        raise WasmTaintException(reason="cannot read {}: {}".format(path, e), code=ExitCodes.IO)
    module = decode_module(data)
    logger.debug("decoded {}: {}".format(path, module.get_summary()))
    return module


def format_delta(delta):
    if not delta:
        return '-'
    return ';'.join('{}={}'.format(where, label.compact()) for where, label in delta)


def format_stack(stack):
    return '[' + ', '.join(str(value) for value in stack) + ']'


def format_trace(record):
    """``<step>\\t<func>\\t0x<offset>\\t<opcode>\\t<depth>\\t<delta>[\\t<stack>]``"""
    line = '{}\t{}\t0x{:06x}\t{}\t{}\t{}'.format(record.step, record.func_index, record.offset, record.opcode,
                                                record.depth, format_delta(record.delta))
    if record.stack is not None:
        line += '\t' + format_stack(record.stack)
    return line


def cmd_run(config, max_call_depth, out=None):
    """
    Decode the module, invoke the export and print the report; with
    ``config.trace`` one trace line per executed instruction comes first.

    :return: exit status
    """
    out = out or sys.stdout
    args = config.arguments()
    module = read_module(config.module)

    tracer = None
    if config.trace:
        def tracer(record):
            out.write(format_trace(record) + '\n')

    instance = instantiate(module, max_call_depth=config.max_depth or max_call_depth, tracer=tracer,
                           show_stack=config.show_stack)
    try:
        _, report = instance.invoke(config.invoke, args)
    except TrapException as trap:
        if config.trace:
            out.write('TRAP\t{}\n'.format(trap.reason))
        raise

    if config.report == 'text':
        out.write(report.to_text() + '\n')
    else:
        out.write(report.to_json() + '\n')
    return ExitCodes.OK


def cmd_trace(config, max_call_depth, out=None):
    config.trace = True
    return cmd_run(config, max_call_depth, out)


def cmd_bench(manifest_path, out_path, repeats=None, max_call_depth=DEFAULT_MAX_CALL_DEPTH, progress=True,
              transfer_ratio=DEFAULT_TRANSFER_RATIO):
    """
    Benchmark a bench manifest and write the CSV to ``out_path``. Every case
    timed at two or more sizes also gets the constant-transfer check; a case
    whose per-instruction time grows past ``transfer_ratio`` is logged as a
    warning.
    """
    manifest = load_bench_manifest(manifest_path)
    frame = run_bench(manifest, repeats=repeats, max_call_depth=max_call_depth, progress=progress)
    try:
        write_bench_csv(frame, out_path)
    except OSError as e:
        raise WasmTaintException(reason="cannot write {}: {}".format(out_path, e), code=ExitCodes.IO)
    logger.info("wrote {} rows to {}".format(len(frame), out_path))
    for case in frame['case'].unique():
        if frame[(frame['case'] == case) & (frame['mode'] == TAINTED)]['n'].nunique() < 2:
            continue
        passed, per_small, per_large = check_constant_transfer(frame, case, transfer_ratio)
        if not passed:
            logger.warning("{}: per-instruction time grew from {:.3g} to {:.3g} ms, over {}x".format(
                case, per_small, per_large, transfer_ratio))
    return ExitCodes.OK


def cmd_corpus(manifest_path, max_call_depth, out=None):
    out = out or sys.stdout
    summary = run_corpus(load_manifest(manifest_path), max_call_depth)
    out.write(summary.to_text() + '\n')
    return ExitCodes.OK if summary.ok else ExitCodes.CORPUS_FAILURE


def cmd_check_scaling(csv_path, timing_r2, memory_r2, out=None):
    out = out or sys.stdout
    result = check_scaling(csv_path, timing_r2=timing_r2, memory_r2=memory_r2)
    out.write(result.to_text() + '\n')
    return ExitCodes.OK if result.passed else ExitCodes.SCALING_FAILURE


def cmd_inspect(module_path, out=None):
    out = out or sys.stdout
    module = read_module(module_path)
    lines = ["version: {}".format(module.version)]
    lines.append("types:")
    for i, func_type in enumerate(module.types):
        lines.append("  [{}] {}".format(i, func_type))
    lines.append("functions:")
    for i, function in enumerate(module.functions):
        lines.append("  [{}] type {} {} at 0x{:06x}: {} locals, {} instructions".format(
            i, function.type_index, module.types[function.type_index], function.offset,
            len(function.local_types()), len(function.body)))
    lines.append("exports:")
    for name, export in sorted(module.exports.items()):
        lines.append("  {} -> {} {}".format(name, export.kind, export.index))
    for memory in module.memories:
        lines.append("memory: {} pages min, max {}".format(memory.limits.minimum, memory.limits.maximum))
    for table in module.tables:
        lines.append("table: {} entries min, max {}".format(table.limits.minimum, table.limits.maximum))
    for i, global_ in enumerate(module.globals):
        lines.append("global [{}] {} {} = {}".format(i, 'mut' if global_.mutable else 'const', global_.vtype,
                                                      global_.init.imm))
    for segment in module.data_segments:
        lines.append("data: {} bytes at {}".format(len(segment.data), segment.offset.imm))
    for segment in module.element_segments:
        lines.append("elem: {} entries at {}".format(len(segment.function_indices), segment.offset.imm))
    if module.start is not None:
        lines.append("start: {}".format(module.start))
    for name in module.custom_sections:
        lines.append("custom: {}".format(name))
    out.write('\n'.join(lines) + '\n')
    return ExitCodes.OK


def _add_run_arguments(parser):
    parser.add_argument('module', help='The wasm binary to run.')
    parser.add_argument('--invoke', required=True, metavar='NAME', help='Exported function to call.')
    parser.add_argument('--args', type=_split, default=[], metavar='T:V[,T:V...]',
                        help='Typed arguments, e.g. i32:5,i64:-3.')
    parser.add_argument('--taint', type=_indices, default=[], metavar='I[,I...]',
                        help='Argument positions to mark as taint sources.')
    parser.add_argument('--report', choices=REPORT_FORMATS, default='json', help='Report format.')
    parser.add_argument('--show-stack', action='store_true', dest='show_stack',
                        help='Append the value stack to every trace line.')
    parser.add_argument('--max-depth', type=int, dest='runtime_max_call_depth', metavar='N',
                        help='Call depth limit (default from WASM_TAINT_MAX_DEPTH or the configuration).')


def parse_args(argv=None):
    parser = argparse.ArgumentParser(prog='wasmtaint',
                                     description='WebAssembly interpreter with dynamic taint tracking')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level.')
    parser.add_argument('--config', metavar='INI', help='Configuration file overriding the packaged defaults.')

    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    run = commands.add_parser('run', help="Invoke an export and report its taint.")
    _add_run_arguments(run)
    run.add_argument('--trace', action='store_true', help='Print one line per executed instruction.')

    trace = commands.add_parser('trace', help="Same as run --trace.")
    _add_run_arguments(trace)

    bench = commands.add_parser('bench', help="Time bench cases with and without taint tracking.")
    bench.add_argument('manifest', help='Bench manifest (JSON).')
    bench.add_argument('--out', required=True, metavar='CSV', help='Where to write the results.')
    bench.add_argument('--repeats', type=int, metavar='R', help='Runs per size and mode.')
    bench.add_argument('--no-progress', action='store_false', dest='progress', help='Hide the progress bar.')
    bench.add_argument('--max-depth', type=int, dest='runtime_max_call_depth', metavar='N')
    bench.add_argument('--transfer-ratio', type=float, dest='scaling_transfer_ratio', metavar='X')

    corpus = commands.add_parser('corpus', help="Run a fixture manifest.")
    corpus.add_argument('manifest', help='Fixture manifest (JSON).')
    corpus.add_argument('--max-depth', type=int, dest='runtime_max_call_depth', metavar='N')

    scaling = commands.add_parser('check-scaling', help="Check a bench CSV for linear scaling.")
    scaling.add_argument('csv', help='CSV written by bench.')
    scaling.add_argument('--timing-r2', type=float, dest='scaling_timing_r2', metavar='R2')
    scaling.add_argument('--memory-r2', type=float, dest='scaling_memory_r2', metavar='R2')

    inspect = commands.add_parser('inspect', help="Describe the contents of a wasm binary.")
    inspect.add_argument('module', help='The wasm binary to describe.')

    return parser.parse_args(argv)


def _configure_logging(config, verbose):
    level = logging.DEBUG if verbose else config.get('logging', 'level').upper()
    try:
        logging.basicConfig(
            level=level,
            format=config.get('logging', 'format'),
            datefmt=config.get('logging', 'datefmt'),
            stream=sys.stderr,
        )
    except ValueError as e:
        raise ConfigurationException("logging: {}".format(e))


def main(argv=None):
    args = parse_args(argv)
    try:
        config = inject_args_in_config(args, load_config(args.config))
        _configure_logging(config, args.verbose)
        max_call_depth = get_int(config, 'runtime', 'max_call_depth', minimum=1)

        if args.command in ('run', 'trace'):
            run_config = RunConfig(module=args.module, invoke=args.invoke, args=args.args, taint=args.taint,
                                   report=args.report, trace=getattr(args, 'trace', False),
                                   show_stack=args.show_stack)
            if args.command == 'trace':
                return cmd_trace(run_config, max_call_depth)
            return cmd_run(run_config, max_call_depth)
        if args.command == 'bench':
            repeats = args.repeats
            if repeats is None and load_bench_manifest(args.manifest).repeats is None:
                repeats = get_int(config, 'bench', 'repeats', minimum=1)
            return cmd_bench(args.manifest, args.out, repeats=repeats, max_call_depth=max_call_depth,
                             progress=args.progress,
                             transfer_ratio=get_float(config, 'scaling', 'transfer_ratio'))
        if args.command == 'corpus':
            return cmd_corpus(args.manifest, max_call_depth)
        if args.command == 'check-scaling':
            return cmd_check_scaling(args.csv, get_float(config, 'scaling', 'timing_r2'),
                                     get_float(config, 'scaling', 'memory_r2'))
        return cmd_inspect(args.module)
    except TrapException as trap:
        sys.stderr.write("trap: {}\n".format(trap))
        return trap.code
    except WasmTaintException as e:
        sys.stderr.write("error: {}\n".format(e.reason))
        logger.debug("error {} exits with {}".format(e.error, e.code))
        return e.code
