"""
Config text <-> SimConfig

Line-oriented format, `#` starts a comment:

    [graph]
    nodes 5
    edge 5 1 1.0          # information flows 5 -> 1 with a_15 = 1.0
    [initial]
    canonicalize true
    q 1 0 -0.6894 -0.6140 0.3843
    [integrator]
    dt 0.01
    t_final 60
    record_every 10
    renormalize true
    protocol multiplicative
    [transform]
    mode auto             # auto | none | explicit
    v 1 0 0 0             # only with mode explicit
    [output]
    name case1
    path runs/case1
    svg false
"""
import logging
import math
from pathlib import Path

from pydantic import ValidationError

from .exceptions import ConfigError
from .schemas import SimConfig

logger = logging.getLogger(__name__)

SECTIONS = ("graph", "initial", "integrator", "transform", "output")

# (section, key) -> (SimConfig field path, value type)
_SCALAR_KEYS = {
    ("graph", "nodes"): (("n",), int),
    ("initial", "canonicalize"): (("canonicalize_init",), bool),
    ("integrator", "dt"): (("integrator", "dt"), float),
    ("integrator", "t_final"): (("integrator", "t_final"), float),
    ("integrator", "record_every"): (("integrator", "record_every"), int),
    ("integrator", "renormalize"): (("integrator", "renormalize"), bool),
    ("integrator", "protocol"): (("integrator", "protocol"), str),
    ("transform", "mode"): (("transform_mode",), str),
    ("output", "name"): (("name",), str),
    ("output", "path"): (("output_path",), str),
    ("output", "svg"): (("emit_svg",), bool),
}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _number(token: str, line: int, kind=float):
    try:
        value = kind(token)
    except ValueError:
        raise ConfigError(f"expected {kind.__name__}, got {token!r}", line=line)
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"value must be finite, got {token!r}", line=line)
    return value


def _convert(token: str, kind, line: int):
    if kind is bool:
        low = token.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"expected true/false, got {token!r}", line=line)
    if kind is str:
        return token
    return _number(token, line, kind)


def _quad(tokens: list[str], line: int) -> tuple[float, float, float, float]:
    if len(tokens) != 4:
        raise ConfigError(f"quaternion needs 4 components (eps q1 q2 q3), got {len(tokens)}", line=line)
    return tuple(_number(t, line) for t in tokens)


def _put(data: dict, path: tuple[str, ...], value):
    for key in path[:-1]:
        data = data.setdefault(key, {})
    data[path[-1]] = value


def _field_name(error: ValidationError) -> tuple[str, str]:
    first = error.errors()[0]
    loc = ".".join(str(p) for p in first.get("loc", ())) or "config"
    return loc, first.get("msg", str(error))


def parse_config(text: str) -> SimConfig:
    """Parse and validate config text; syntax errors carry the line number, semantic errors the field"""
    data: dict = {}
    edges: list[dict] = []
    initial: dict[int, tuple] = {}
    seen: dict[tuple[str, str], int] = {}
    section = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", line=lineno)
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if section is None:
            raise ConfigError("entry outside of any section", line=lineno)

        key, *args = line.split()
        key = key.lower()

        if (section, key) == ("graph", "edge"):
            if len(args) != 3:
                raise ConfigError("edge needs 'edge j i weight'", line=lineno)
            edges.append(
                {"j": _number(args[0], lineno, int), "i": _number(args[1], lineno, int), "weight": _number(args[2], lineno)}
            )
        elif (section, key) == ("initial", "q"):
            if not args:
                raise ConfigError("q needs 'q id eps q1 q2 q3'", line=lineno)
            agent = _number(args[0], lineno, int)
            if agent in initial:
                raise ConfigError(f"agent {agent} has two initial quaternions", line=lineno)
            initial[agent] = _quad(args[1:], lineno)
        elif (section, key) == ("transform", "v"):
            data["transform_v"] = _quad(args, lineno)
        elif (section, key) in _SCALAR_KEYS:
            if len(args) != 1:
                raise ConfigError(f"'{key}' takes exactly one value", line=lineno)
            if (section, key) in seen:
                raise ConfigError(f"'{key}' already set on line {seen[(section, key)]}", line=lineno)
            seen[(section, key)] = lineno
            path, kind = _SCALAR_KEYS[(section, key)]
            _put(data, path, _convert(args[0], kind, lineno))
        else:
            raise ConfigError(f"unknown key '{key}' in [{section}]", line=lineno)

    if "n" not in data:
        raise ConfigError("missing 'nodes' in [graph]", field="n")
    n = data["n"]
    missing = [k for k in range(1, n + 1) if k not in initial]
    extra = sorted(k for k in initial if not 1 <= k <= n)
    if extra:
        raise ConfigError(f"initial quaternion for unknown agent {extra[0]}", field="initial")
    if missing:
        raise ConfigError(f"no initial quaternion for agent {missing[0]}", field="initial")

    data["edges"] = edges
    data["initial"] = [initial[k] for k in range(1, n + 1)]
    try:
        config = SimConfig(**data)
    except ValidationError as e:
        field, msg = _field_name(e)
        raise ConfigError(msg, field=field) from e

    config.graph()  # edge errors name the edge
    logger.info(f"Parsed config '{config.name}': {config.n} agents, {len(config.edges)} edges")
    return config


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}")
    return parse_config(text)


def dump_config(config: SimConfig) -> str:
    """Config text that parses back to an equal SimConfig"""
    lines = ["[graph]", f"nodes {config.n}"]
    lines += [f"edge {e.j} {e.i} {e.weight!r}" for e in config.edges]
    lines += ["", "[initial]", f"canonicalize {str(config.canonicalize_init).lower()}"]
    lines += [f"q {k} " + " ".join(repr(c) for c in q) for k, q in enumerate(config.initial, start=1)]
    it = config.integrator
    lines += [
        "",
        "[integrator]",
        f"dt {it.dt!r}",
        f"t_final {it.t_final!r}",
        f"record_every {it.record_every}",
        f"renormalize {str(it.renormalize).lower()}",
        f"protocol {it.protocol.value}",
        "",
        "[transform]",
        f"mode {config.transform_mode.value}",
    ]
    if config.transform_v is not None:
        lines.append("v " + " ".join(repr(c) for c in config.transform_v))
    lines += ["", "[output]", f"name {config.name}", f"svg {str(config.emit_svg).lower()}"]
    if config.output_path:
        lines.append(f"path {config.output_path}")
    return "\n".join(lines) + "\n"
