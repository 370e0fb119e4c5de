# Generated by arc-reference {{generator_version}} for {{model_name}}; do not edit.
"""Scheduler, value encoding and trace I/O shared by every generated unit.

Messages are plain Python values (bool, int, str; enumeration values as
their name) and None for an absent message.
"""

import json

I64_MIN = -(2 ** 63)
I64_MAX = 2 ** 63 - 1


class EvalError(Exception):
    pass


class InputError(Exception):
    pass


def _checked(op, value):
    if value < I64_MIN or value > I64_MAX:
        raise EvalError("integer overflow in `%s`" % op)
    return value


def add(a, b):
    return _checked("+", a + b)


def sub(a, b):
    return _checked("-", a - b)


def mul(a, b):
    return _checked("*", a * b)


def div(a, b):
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return _checked("/", q)


def neg(a):
    return _checked("-", -a)


def read(inputs, port):
    value = inputs[port]
    if value is None:
        raise EvalError("read of absent port `%s`" % port)
    return value


def conforms(value, ty):
    """ty is "Boolean", "Integer", "String" or [enum name, [values]]."""
    if ty == "Boolean":
        return type(value) is bool
    if ty == "Integer":
        return type(value) is int and I64_MIN <= value <= I64_MAX
    if ty == "String":
        return type(value) is str
    return type(value) is str and value in ty[1]


def type_name(ty):
    return ty if isinstance(ty, str) else ty[0]


class ScriptedStub:
    """Replays messages keyed by the tick at which they are observed."""

    def __init__(self, schedule):
        self.schedule = schedule

    def init(self, config):
        return dict(self.schedule.get(0, {}))

    def react(self, tick, inputs):
        return dict(self.schedule.get(tick + 1, {}))


class NativeUnit:
    """Forwards to a native implementation and validates what it returns."""

    def __init__(self, path, ins, outs, config, impl):
        self.path = path
        self.ins = ins
        self.outs = outs
        self.config = config
        self.impl = impl

    def _check(self, tick, result):
        result = {} if result is None else result
        out = {}
        for port, value in result.items():
            if port not in self.outs:
                raise EvalError("`%s` at tick %d: `%s` is not an out-port" % (self.path, tick, port))
            if value is not None and not conforms(value, self.outs[port]):
                raise EvalError(
                    "`%s` at tick %d: value %r does not fit `%s` of type %s"
                    % (self.path, tick, value, port, type_name(self.outs[port]))
                )
            out[port] = value
        return out

    def init(self):
        return self._check(0, self.impl.init(dict(self.config)))

    def react(self, tick, inputs):
        return self._check(tick, self.impl.react(tick, inputs))


def run(keys, sources, units, env, ticks):
    """Executes `ticks` ticks.

    keys: every port key; sources: key -> ("out", unit index, port) |
    ("in", key) | None; units: objects with `path`, `ins`, `init()` and
    `react(tick, inputs)`; env: tick -> {root in-port key: value}.
    Returns one {key: value} map per tick.
    """
    pending = []
    for u in units:
        try:
            pending.append(u.init())
        except EvalError as e:
            raise EvalError("`%s`: initialization failed: %s" % (u.path, e)) from None
    trace = []
    for tick in range(ticks):
        inputs = env.get(tick, {})
        observed = {}
        for key in keys:
            src = sources[key]
            if src is None:
                observed[key] = None
            elif src[0] == "out":
                observed[key] = pending[src[1]].get(src[2])
            else:
                observed[key] = inputs.get(src[1])
        for i, u in enumerate(units):
            seen = {p: observed[u.path + "." + p] for p in u.ins}
            try:
                pending[i] = u.react(tick, seen)
            except EvalError as e:
                if isinstance(u, NativeUnit):
                    raise
                raise EvalError("`%s` at tick %d: %s" % (u.path, tick, e)) from None
        trace.append(observed)
    return trace


def dumps_tick(tick, ports):
    body = json.dumps(ports, separators=(",", ":"), sort_keys=True, ensure_ascii=False)
    return '{"tick":%d,"ports":%s}' % (tick, body)


def write_trace(path, trace):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for tick, ports in enumerate(trace):
            f.write(dumps_tick(tick, ports))
            f.write("\n")


def read_trace(path, types):
    """Reads a JSONL trace; returns (tick -> {key: value}, length)."""
    out = {}
    last = None
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    for n, raw in enumerate(lines, 1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except ValueError as e:
            raise InputError("line %d: %s" % (n, e)) from None
        if not isinstance(obj, dict):
            raise InputError("line %d: expected a JSON object" % n)
        tick = obj.get("tick")
        if type(tick) is not int or tick < 0:
            raise InputError("line %d: missing or invalid `tick`" % n)
        if any(k not in ("tick", "ports") for k in obj):
            raise InputError("line %d: only `tick` and `ports` are allowed" % n)
        if last is not None and tick <= last:
            raise InputError("line %d: tick %d is not greater than the previous tick" % (n, tick))
        last = tick
        ports = obj.get("ports", {})
        if not isinstance(ports, dict):
            raise InputError("line %d: `ports` must be an object" % n)
        row = {}
        for key, value in ports.items():
            if key not in types:
                raise InputError("line %d: unknown port `%s`" % (n, key))
            if value is not None and not conforms(value, types[key]):
                raise InputError(
                    "line %d: `%s` expects %s, got %s" % (n, key, type_name(types[key]), json.dumps(value))
                )
            row[key] = value
        out[tick] = row
    return out, (0 if last is None else last + 1)
