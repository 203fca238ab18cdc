#!/usr/bin/env python3
# Copyright (c) the SELIC Project Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Deterministic stand-in for the pretrained semantic helper.

Every invocation appends its subcommand to $FAKE_HELPER_LOG when set.
"""
import hashlib
import os
import struct
import sys

DIM = 768


def log(cmd):
    path = os.environ.get("FAKE_HELPER_LOG")
    if path:
        with open(path, "a") as f:
            f.write(cmd + "\n")


def main(argv):
    log(argv[0] if argv else "")
    if argv == ["id"]:
        print("fake-helper-v1")
    elif argv[0] == "caption":
        with open(argv[1], "rb") as f:
            data = f.read()
        if not data.startswith(b"P6"):
            sys.exit("not a ppm")
        print("a fake caption " + hashlib.sha256(data).hexdigest()[:8])
    elif argv[0] == "embed":
        with open(argv[1], "rb") as f:
            seed = hashlib.sha256(f.read()).digest()
        values = [((seed[i % 32] + i) % 17 - 8) / 8.0 for i in range(DIM)]
        with open(argv[2], "wb") as f:
            f.write(struct.pack("<%df" % DIM, *values))
    elif argv == ["checksum"]:
        print(12345)
    else:
        sys.exit(2)


if __name__ == "__main__":
    main(sys.argv[1:])
