#!/usr/bin/env python3
# Copyright 2026 The vemorph Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates wire fixtures and suite files against protocol.schema.json."""

import argparse
import json
import pathlib
import sys

import jsonschema

REQUESTS = {
    "/v1/extract": "extract_request",
    "/v1/detect": "detect_request",
    "/v1/ground": "ground_request",
    "/v1/inpaint": "inpaint_request",
    "/v1/synonym": "synonym_request",
    "/v1/predict": "predict_request",
}
RESPONSES = {
    "/v1/health": "health_response",
    "/v1/extract": "extract_response",
    "/v1/detect": "detect_response",
    "/v1/ground": "ground_response",
    "/v1/inpaint": "inpaint_response",
    "/v1/synonym": "synonym_response",
    "/v1/predict": "predict_response",
}


class Checker:
    def __init__(self, schema):
        jsonschema.Draft202012Validator.check_schema(schema)
        self.schema = schema
        self.failures = []
        self.checked = 0

    def validator(self, name):
        sub = {"$ref": f"#/$defs/{name}", "$defs": self.schema["$defs"]}
        return jsonschema.Draft202012Validator(sub)

    def expect(self, name, instance, where, valid=True):
        self.checked += 1
        errors = list(self.validator(name).iter_errors(instance))
        if valid and errors:
            self.failures.append(f"{where}: not a valid {name}: {errors[0].message}")
        if not valid and not errors:
            self.failures.append(f"{where}: unexpectedly valid {name}")


def jsonl(path):
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            if line.strip():
                yield n, json.loads(line)


def check_fixtures(c, root):
    files = sorted(pathlib.Path(root).glob("*.json"))
    if not files:
        c.failures.append(f"{root}: no fixtures")
    for path in files:
        fx = json.loads(path.read_text(encoding="utf-8"))
        req, resp = fx["request"], fx["response"]
        body = None
        if req["body"]:
            try:
                body = json.loads(req["body"])
            except json.JSONDecodeError:
                body = None
        status = resp["status"]
        if req["method"] == "POST" and req["path"] in REQUESTS and body is not None:
            if status != 400:
                c.expect(REQUESTS[req["path"]], body, f"{path.name} request")
            elif "missing field" in json.loads(resp["body"])["error"]["message"]:
                c.expect(REQUESTS[req["path"]], body, f"{path.name} request", valid=False)
        out = json.loads(resp["body"])
        if status == 200:
            c.expect(RESPONSES[req["path"]], out, f"{path.name} response")
        else:
            c.expect("error", out, f"{path.name} response")


def check_suite(c, suite):
    suite = pathlib.Path(suite)
    for n, rec in jsonl(suite / "manifest.jsonl"):
        c.expect("test_record", rec, f"manifest.jsonl:{n}")
    for n, rec in jsonl(suite / "predictions.jsonl"):
        c.expect("prediction_record", rec, f"predictions.jsonl:{n}")
    for n, rec in jsonl(suite / "alignments.jsonl"):
        c.expect("alignment_record", rec, f"alignments.jsonl:{n}")
    c.expect("report", json.loads((suite / "report.json").read_text()), "report.json")


def check_negatives(c):
    box = {"x1": 0, "y1": 0, "x2": 1, "y2": 1}
    c.expect("box", {"x1": 0, "y1": 0, "x2": 1}, "box without y2", valid=False)
    c.expect("predict_response", {"label": "maybe"}, "unknown label", valid=False)
    c.expect("predict_response", {"label": "neutral", "confidence": 1.5}, "confidence", valid=False)
    c.expect("ground_response", {"box": box, "confidence": 0.5}, "ground response")
    c.expect("synonym_response", {"text": "x"}, "synonym without substitutions", valid=False)
    c.expect("dataset_record", {"id": "a", "image": "a.png", "hypothesis": "h",
                                "label": "unknown"}, "dataset label", valid=False)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schema", required=True)
    ap.add_argument("--fixtures")
    ap.add_argument("--suite")
    ap.add_argument("--dataset")
    args = ap.parse_args()

    c = Checker(json.loads(pathlib.Path(args.schema).read_text(encoding="utf-8")))
    if args.fixtures:
        check_fixtures(c, args.fixtures)
    if args.suite:
        check_suite(c, args.suite)
    if args.dataset:
        for n, rec in jsonl(args.dataset):
            c.expect("dataset_record", rec, f"dataset:{n}")
    check_negatives(c)

    for f in c.failures:
        print("FAIL", f)
    print(f"{c.checked} instances checked, {len(c.failures)} failures")
    return 1 if c.failures else 0


if __name__ == "__main__":
    sys.exit(main())
