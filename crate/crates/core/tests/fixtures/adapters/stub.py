#!/usr/bin/env python3
"""Misbehaving adapters for tests. Usage: stub.py <mode>"""
import json
import random
import sys
import time

mode = sys.argv[1] if len(sys.argv) > 1 else "last_value"

if mode == "sleep":
    time.sleep(30)
    sys.exit(0)

requests = []
for line in sys.stdin:
    if line.strip():
        requests.append(json.loads(line))


def respond(req):
    last = req["window"][-1]
    forecasts = {str(h): last for h in req["horizons"]}
    if mode == "non_numeric":
        forecasts = {str(h): "abc" for h in req["horizons"]}
    elif mode == "drop_horizon":
        forecasts.pop(str(req["horizons"][-1]))
    elif mode == "wrong_keys":
        forecasts = {str(h + 1): last for h in req["horizons"]}
    return {"id": req["id"], "forecasts": forecasts}


if mode == "crash":
    sys.stderr.write("model failed to load\n")
    sys.exit(3)

out = [respond(r) for r in requests]
if mode == "shuffle":
    random.Random(7).shuffle(out)
if mode == "truncate":
    out = out[:-1]
for resp in out:
    sys.stdout.write(json.dumps(resp) + "\n")
sys.stdout.flush()
