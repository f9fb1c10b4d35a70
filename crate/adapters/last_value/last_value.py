#!/usr/bin/env python3
"""Reference dbits adapter: forecasts the window's last value at every horizon.

Reads one JSON request per line on stdin:
    {"id": 0, "series_id": "RPI", "window": [...], "horizons": [12, 24]}
and writes one JSON response per line on stdout:
    {"id": 0, "forecasts": {"12": 1.0, "24": 1.0}}
"""
import json
import sys


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        last = req["window"][-1]
        resp = {"id": req["id"], "forecasts": {str(h): last for h in req["horizons"]}}
        sys.stdout.write(json.dumps(resp) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
