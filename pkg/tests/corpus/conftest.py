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

import os

import pytest

from wasmtaint.harness.manifest import load_manifest

CORPUS_DIR = os.path.dirname(os.path.abspath(__file__))


def pytest_addoption(parser):
    parser.addoption("--corpus-manifest", action="store", default=os.path.join(CORPUS_DIR, "manifest.json"))
    parser.addoption("--bench-manifest", action="store", default=os.path.join(CORPUS_DIR, "bench.json"))
    parser.addoption("--bench-repeats", action="store", type=int, default=None)


@pytest.fixture(scope="session")
def corpus_manifest_path(request):
    return request.config.getoption("--corpus-manifest")


@pytest.fixture(scope="session")
def bench_manifest_path(request):
    return request.config.getoption("--bench-manifest")


@pytest.fixture(scope="session")
def bench_repeats(request):
    return request.config.getoption("--bench-repeats")


def pytest_generate_tests(metafunc):
    if "fixture_case" in metafunc.fixturenames:
        manifest = load_manifest(metafunc.config.getoption("--corpus-manifest"))
        metafunc.parametrize("fixture_case", manifest.fixtures, ids=[f.name for f in manifest.fixtures])
