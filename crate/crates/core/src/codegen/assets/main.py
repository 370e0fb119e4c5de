# Generated by arc-reference {{generator_version}} for {{model_name}}; do not edit.
"""Runs the generated model on a JSONL input trace.

usage: main.py --input IN.jsonl --ticks N --output OUT.jsonl [--stubs STUBS.jsonl]

--stubs replaces the native implementation of every instance that has keys
in STUBS with a scripted stub replaying those messages.
"""

import argparse
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)
sys.path.insert(1, os.path.dirname(HERE))

import arc_runtime as rt  # noqa: E402
import model  # noqa: E402


def stub_schedules(path):
    schedules = {}
    trace, _ = rt.read_trace(path, model.NATIVE_OUTPUTS)
    for tick, row in trace.items():
        for key, value in row.items():
            if value is None:
                continue
            owner = max((p for p in model.NATIVES if key.startswith(p + ".")), key=len)
            schedules.setdefault(owner, {}).setdefault(tick, {})[key[len(owner) + 1:]] = value
    return schedules


def main(argv=None):
    ap = argparse.ArgumentParser(description="Run the generated %s model." % model.MODEL_NAME)
    ap.add_argument("--input", required=True)
    ap.add_argument("--ticks", required=True, type=int)
    ap.add_argument("--output", required=True)
    ap.add_argument("--stubs")
    args = ap.parse_args(argv)
    if args.ticks < 0:
        print("error: --ticks must be non-negative", file=sys.stderr)
        return 2
    try:
        env, _ = rt.read_trace(args.input, model.INPUTS)
        stubs = stub_schedules(args.stubs) if args.stubs else {}
    except rt.InputError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 4
    try:
        units = model.build(stubs)
        trace = rt.run(model.KEYS, model.SOURCES, units, env, args.ticks)
    except rt.EvalError as e:
        print("error: %s" % e, file=sys.stderr)
        return 3
    try:
        rt.write_trace(args.output, trace)
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
