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
import os
import sys

import pytest

from wasmtaint.decoder.decoder import decode_module
from wasmtaint.runtime.instance import instantiate

logging.basicConfig(
    level=logging.DEBUG,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt="%Y-%m-%dT%H:%M:%S", stream=sys.stderr)

CORPUS_BIN = os.path.join(os.path.dirname(__file__), '..', '..', 'tests', 'corpus', 'bin')


@pytest.fixture(scope="session")
def corpus_bin():
    return os.path.abspath(CORPUS_BIN)


@pytest.fixture()
def load_instance():
    """Decode and instantiate a binary, passing any runtime options through."""
    def _load(data, **kwargs):
        return instantiate(decode_module(data), **kwargs)
    return _load
