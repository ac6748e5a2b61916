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

import configparser
import logging
import os

from wasmtaint.exception import ConfigurationException

CONFIG_PATH = os.path.join(os.path.dirname(__file__), "config", "wasmtaint.ini")
MAX_DEPTH_ENV = "WASM_TAINT_MAX_DEPTH"

logger = logging.getLogger(__name__)


def load_config(path=None, environ=None):
    """
    Packaged defaults, overridden by an optional user ini file, then by
    the WASM_TAINT_MAX_DEPTH environment variable.
    """
    config = configparser.RawConfigParser()
    with open(CONFIG_PATH) as config_file:
        config.read_file(config_file)

    if path:
        user_config = configparser.RawConfigParser()
        try:
            with open(path) as config_file:
                user_config.read_file(config_file)
        except (OSError, configparser.Error) as e:
            raise ConfigurationException("Cannot read configuration {}: {}".format(path, e))
        override_config(config, user_config)

    environ = os.environ if environ is None else environ
    max_depth = environ.get(MAX_DEPTH_ENV)
    if max_depth:
        logger.debug('use {}={} for runtime.max_call_depth'.format(MAX_DEPTH_ENV, max_depth))
        config.set('runtime', 'max_call_depth', max_depth)

    return config


def override_config(first, second):
    for section in second.sections():
        if first.has_section(section):  # only override preexisting section, ignores the other
            for option in second.options(section):
                if second.get(section, option) is not None:
                    first.set(section, option, second.get(section, option))
    return first


def inject_args_in_config(args, config):
    """
        Takes argparse arguments and push them in the config
         with syntax args.<section>_<option>
    """
    for name, value in sorted(vars(args).items()):
        first_ = name.find('_')
        if first_ > 0 and value is not None:
            s, o = name[:first_], name[first_ + 1:]
            if not config.has_section(s):
                continue
            logger.debug('inject argument {} = {} in configuration section {}, option {}'.format(name, value, s, o))
            config.set(s, o, str(value))
    return config


def get_int(config, section, option, minimum=None):
    raw = config.get(section, option)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationException("{}.{} must be an integer, got '{}'".format(section, option, raw))
    if minimum is not None and value < minimum:
        raise ConfigurationException("{}.{} must be at least {}, got {}".format(section, option, minimum, value))
    return value


def get_float(config, section, option):
    raw = config.get(section, option)
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationException("{}.{} must be a number, got '{}'".format(section, option, raw))
