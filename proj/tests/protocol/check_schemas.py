# Copyright 2026 The comicpipe Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates fixtures and CLI output against the schemas in protocol/.

usage: check_schemas.py <protocol dir> <fixtures dir> [comicpipe binary]
"""

import json
import pathlib
import subprocess
import sys

import jsonschema

ROUTES = {"/v1/detect": "detect", "/v1/classify": "classify", "/v1/ocr": "ocr", "/v1/generate": "generate"}


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main(argv):
    protocol, fixtures = pathlib.Path(argv[1]), pathlib.Path(argv[2])
    binary = argv[3] if len(argv) > 3 else None
    schemas = {p.name[: -len(".schema.json")]: load(p) for p in protocol.glob("*.schema.json")}
    for s in schemas.values():
        jsonschema.Draft202012Validator.check_schema(s)

    def check(name, doc, what):
        jsonschema.Draft202012Validator(schemas[name]).validate(doc)
        print(f"ok  {name:<20} {what}")

    checked = 0
    for fixture in sorted(fixtures.rglob("*.json")):
        doc = load(fixture)
        if not (isinstance(doc, dict) and "entries" in doc):
            continue
        for i, entry in enumerate(doc["entries"]):
            kind = ROUTES[entry["route"]]
            # Fixtures store the image digest; put a wire-shaped body back together.
            request = {k: v for k, v in entry["request"].items() if k not in ("route", "image_sha256")}
            request["image_b64"] = ""
            check(kind + ".request", request, f"{fixture.relative_to(fixtures)}[{i}]")
            check(kind + ".response", entry["response"], f"{fixture.relative_to(fixtures)}[{i}]")
            checked += 2

    check("annotations", load(fixtures / "dilbert" / "annotations.json"), "dilbert/annotations.json")
    check("context", load(fixtures / "dilbert" / "context.golden.json"), "dilbert/context.golden.json")
    check("error", {"error": {"code": "bad_image", "message": "cannot decode"}}, "sample error body")
    checked += 3

    if binary:
        strip = str(fixtures / "dilbert" / "strip.png")
        config = str(fixtures / "dilbert" / "config.json")
        for cmd, name in ((["identify", strip, "--config", config], "predictions"),
                          (["context", strip, "--config", config], "context")):
            out = subprocess.run([binary, *cmd], check=True, capture_output=True, text=True).stdout
            check(name, json.loads(out), "comicpipe " + cmd[0])
            checked += 1

    print(f"{checked} documents valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
