"""JSON and CSV reading and writing, and validated run configurations.

All JSON documents carry ``"schema": 1``; documents with another schema
version or with keys outside the documented set are rejected.
"""

from __future__ import annotations

import csv
import dataclasses
import io as _io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config
from .cones import HalfSpaceCone, SampledCone
from .errors import InvalidInputError
from .words import MarkedGroup

__all__ = [
    "to_jsonable",
    "dumps",
    "read_json",
    "write_json",
    "check_keys",
    "load_matrix",
    "load_group",
    "load_cone",
    "write_csv",
    "ball_rows",
    "RunConfig",
]

GROUP_KEYS = {"schema", "n", "generators", "assume_free", "names"}


def to_jsonable(obj):
    """Plain-JSON view of numpy values, dataclasses and objects with ``to_dict``."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def read_json(source):
    """Parse JSON from a path, ``"-"`` (stdin) or an inline JSON string."""
    if isinstance(source, (dict, list)):
        return source
    text = None
    s = str(source)
    if s == "-":
        text = sys.stdin.read()
    elif s.lstrip().startswith(("{", "[")):
        text = s
    else:
        path = Path(s)
        if not path.exists():
            raise InvalidInputError(f"no such file: {s}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON: {exc}") from None


def write_json(obj, path=None):
    text = dumps(obj)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def check_keys(d, allowed, required=(), what="document"):
    if not isinstance(d, dict):
        raise InvalidInputError(f"{what} must be a JSON object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise InvalidInputError(f"unknown {what} keys: {sorted(unknown)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise InvalidInputError(f"{what} is missing {missing}")
    if d.get("schema", config.SCHEMA_VERSION) != config.SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported schema version {d['schema']!r}")


def load_matrix(source):
    m = np.asarray(read_json(source), dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError("matrix must be a square array of arrays")
    return m


def load_group(source):
    d = read_json(source)
    check_keys(d, GROUP_KEYS, ("generators",), "group")
    gens = [np.asarray(g, dtype=float) for g in d["generators"]]
    if "n" in d and any(g.shape != (d["n"], d["n"]) for g in gens):
        raise InvalidInputError(f"generators must be {d['n']}x{d['n']}")
    return MarkedGroup(gens, assume_free=d.get("assume_free", True), names=d.get("names"))


def load_cone(source):
    """A :class:`SampledCone`, :class:`HalfSpaceCone` or folded subgroup cone."""
    from .invariants import LimitConeEstimate
    from .subgroups import FoldedSubgroupCone

    d = read_json(source)
    if not isinstance(d, dict):
        raise InvalidInputError("cone must be a JSON object")
    if "pieces" in d or "folded" in d:
        return FoldedSubgroupCone.from_dict(d)
    if "forms" in d:
        return HalfSpaceCone.from_dict(d)
    if "cone" in d and "report" in d:
        # output of the admissible construction
        return HalfSpaceCone.from_dict(d["cone"])
    if "ball_radius" in d:
        check_keys(d, {"schema", "kind", "theta", "ball_radius", "norm_cutoff", "count_used",
                       "directions"}, ("directions",), "limit cone estimate")
        return LimitConeEstimate.from_dict(d).cone
    check_keys(d, {"schema", "directions"}, ("directions",), "cone")
    return SampledCone.from_dict(d)


def write_csv(header, rows, path=None):
    """Write a header row and data rows; returns the text when ``path`` is None."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    text = buf.getvalue()
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text


def ball_rows(ball):
    """Header and rows ``word,length,mu_1..mu_n[,lambda_1..lambda_n]``."""
    n = ball.group.n
    header = ["word", "length"] + [f"mu_{i + 1}" for i in range(n)]
    if ball.lam is not None:
        header += [f"lambda_{i + 1}" for i in range(n)]
    words = ball.words()
    rows = []
    for k in range(len(ball)):
        row = [words[k], int(ball.lengths[k])] + list(ball.mu[k])
        if ball.lam is not None:
            row += list(ball.lam[k])
        rows.append(row)
    return header, rows


@dataclasses.dataclass
class RunConfig:
    """Validated parameters of one command.

    Built from a JSON object (``from_dict``) whose keys must be field names,
    plus ``"schema"``. Validation happens before any enumeration starts.
    """

    command: str
    group: object = None
    family: str | None = None
    params: dict = dataclasses.field(default_factory=dict)
    radius: int | None = None
    cutoff: float = 1.0
    kind: str = "cartan"
    theta: object = None
    form: object = None
    v: list | None = None
    eps_list: list = dataclasses.field(default_factory=lambda: list(config.EPSILON_LIST))
    eps: float = 0.05
    threshold: float = config.SHARP_THRESHOLD
    budget: int = config.ELEMENT_BUDGET
    seed: int = 0
    workers: int = 1
    ladder: list = dataclasses.field(default_factory=lambda: list(config.N_LADDER))
    schedule: list | None = None
    subgroup: object = "sl3-block-in-sl4"
    cone: object = None
    growth_directions: list | None = None
    output: str | None = None
    csv: str | None = None
    svg: str | None = None

    COMMANDS = ("project", "enumerate", "limit-cone", "growth", "exponent", "anosov", "sharp",
                "admissible", "deform", "plot")
    FAMILIES = ("sym3-schottky", "sl3-block-deformation")

    @classmethod
    def from_dict(cls, d, command=None):
        names = {f.name for f in dataclasses.fields(cls)}
        d = dict(d)
        if command is not None:
            d.setdefault("command", command)
        check_keys(d, names | {"schema"}, ("command",), "config")
        d.pop("schema", None)
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command not in self.COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        if self.radius is not None and (not isinstance(self.radius, int) or self.radius < 0):
            raise InvalidInputError("radius must be a non-negative integer")
        if not self.cutoff > 0:
            raise InvalidInputError("cutoff must be positive")
        if self.kind not in ("cartan", "jordan", "theta"):
            raise InvalidInputError(f"unknown kind {self.kind!r}")
        if not (isinstance(self.budget, int) and self.budget > 0):
            raise InvalidInputError("budget must be a positive integer")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise InvalidInputError("workers must be a positive integer")
        if any(not e > 0 for e in self.eps_list) or any(
                b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise InvalidInputError("eps_list must be positive and strictly decreasing")
        if not self.threshold >= 0:
            raise InvalidInputError("threshold must be non-negative")
        if not self.eps > 0:
            raise InvalidInputError("eps must be positive")
        if any((not isinstance(n, int)) or n < 1 for n in self.ladder):
            raise InvalidInputError("ladder entries must be positive integers")
        if self.schedule is not None and any(t < 0 for t in self.schedule):
            raise InvalidInputError("schedule values must be non-negative")
        if self.family is not None and self.family not in self.FAMILIES:
            raise InvalidInputError(f"unknown family {self.family!r}; known: {list(self.FAMILIES)}")
        if self.command == "deform" and self.family is None:
            raise InvalidInputError("deform needs a family")
        return self

    def to_dict(self):
        d = {"schema": config.SCHEMA_VERSION}
        d.update({f.name: to_jsonable(getattr(self, f.name)) for f in dataclasses.fields(self)})
        return d
