"""
Experiment configuration: a versioned YAML document validated with `schema`.

    schema_version: 1
    realization: {kind: spin-singlet, gt: 0.785}
    target: {kind: werner, p: 0.5}
    sweep: {parameter: werner_p, start: 0.0, stop: 1.0, points: 101}
    seed: 0
    grid: 73
"""

from __future__ import annotations

import copy
import logging
import re
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from attrs import define, field
from schema import And, Optional as Opt, Or, Schema, SchemaError, Use

from .errors import ConfigError
from .registry import realization_names
from .states import BellKind

logger = logging.getLogger()

SCHEMA_VERSION = 1
DEFAULT_GRID = 73
SWEEP_PARAMETERS = ("werner_p", "gt", "detection_cosine")

_KEY_IN_MESSAGE = re.compile(r"(?:Key|Wrong key|Missing keys?:) '([^']+)'")

_number = And(Use(float), lambda x: x == x and abs(x) != float("inf"), error="must be a finite number")
_vector3 = And([_number], lambda v: len(v) == 3, error="must be a list of 3 numbers")
_gt = {Opt("gt"): _number}

_REALIZATION_SCHEMAS = {
    "spin-singlet": Schema(_gt),
    "spin-triplet-anisotropic": Schema({Opt("variant"): Or("plus3half", "minushalf")}),
    "spin-triplet-effective": Schema(_gt),
    "spin-phi-rotated": Schema({Opt("axis"): Or("x", "y"), **_gt}),
    "young": Schema(
        {
            Opt("k_in"): _vector3,
            Opt("k_out"): _vector3,
            Opt("n_axis"): _vector3,
            Opt("r1"): _vector3,
            Opt("r2"): _vector3,
            Opt("probe_prep"): Or("unpolarized", _vector3),
            Opt("channel_direction"): _vector3,
        }
    ),
    "cbs": Schema(
        {
            Opt("channel"): Or("singlet", "triplet", "parallel", "perpendicular"),
            Opt("k_in"): _vector3,
            Opt("n_axis"): _vector3,
            Opt("separation"): And(_number, lambda x: x > 0, error="must be positive"),
        }
    ),
}

_pair = And([_number], lambda v: len(v) == 2, error="must be a [re, im] or [theta, phi] pair")

_TARGET_SCHEMAS = {
    "bell": Schema({"state": And(str, Use(lambda s: BellKind(s).value), error="must be one of psi+, psi-, phi+, phi-")}),
    "werner": Schema({"p": And(_number, lambda p: 0.0 <= p <= 1.0, error="must lie in [0, 1]")}),
    "product": Schema({"angles": And([_pair], lambda v: len(v) == 2, error="must hold two [theta, phi] pairs")}),
    "matrix": Schema(
        {
            "entries": And(
                [And([_pair], lambda row: len(row) == 4)],
                lambda rows: len(rows) == 4,
                error="must be a 4x4 grid of [re, im] pairs",
            )
        }
    ),
}

_SWEEP_SCHEMA = Schema(
    {
        "parameter": Or(*SWEEP_PARAMETERS, error=f"must be one of {', '.join(SWEEP_PARAMETERS)}"),
        "start": _number,
        "stop": _number,
        "points": And(int, lambda n: n >= 2, error="must be an integer >= 2"),
    }
)

_TOP_LEVEL = Schema(
    {
        "schema_version": And(int, lambda v: v == SCHEMA_VERSION, error=f"must be {SCHEMA_VERSION}"),
        "realization": {"kind": Or(*realization_names(), error="unknown realization"), str: object},
        "target": {"kind": Or(*_TARGET_SCHEMAS, error="unknown target kind"), str: object},
        Opt("sweep"): dict,
        Opt("seed"): And(int, lambda s: s >= 0, error="must be a non-negative integer"),
        Opt("grid"): And(int, lambda n: n >= 3, error="must be an integer >= 3"),
    }
)


@define(frozen=True, kw_only=True)
class TargetSpec:
    """
    Attributes:
        kind: bell, werner, product or matrix.
        params: Validated kind-specific values.
    """

    kind: str
    params: dict[str, Any] = field(factory=dict)


@define(frozen=True, kw_only=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    points: int


@define(frozen=True, kw_only=True)
class ScenarioConfig:
    """
    One validated experiment.

    Attributes:
        realization: Registered realization name.
        params: Realization-specific parameters.
        target: Target state description.
        sweep: Optional one-parameter scan.
        seed: Seed recorded with every report.
        grid: Number of external phase points of the fringe table.
    """

    realization: str
    params: dict[str, Any] = field(factory=dict)
    target: TargetSpec
    sweep: Optional[SweepSpec] = None
    seed: int = 0
    grid: int = DEFAULT_GRID

    def to_dict(self) -> dict[str, Any]:
        """Config echo that re-parses to an equal config."""
        document: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "realization": {"kind": self.realization, **copy.deepcopy(self.params)},
            "target": {"kind": self.target.kind, **copy.deepcopy(self.target.params)},
        }
        if self.sweep is not None:
            document["sweep"] = {
                "parameter": self.sweep.parameter,
                "start": self.sweep.start,
                "stop": self.sweep.stop,
                "points": self.sweep.points,
            }
        document["seed"] = self.seed
        document["grid"] = self.grid
        return document


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    config = parse_config(text)
    logger.info(f"Loaded {config.realization} config from {path}")
    return config


def parse_config(text: str) -> ScenarioConfig:
    """Parses and validates a YAML config, reporting the offending field and its line."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {e}", line=None if mark is None else mark.line + 1) from e
    if not isinstance(document, Mapping):
        raise ConfigError("config must be a mapping at the top level", line=1)
    return _validate(document, node)


def parse_config_dict(document: Mapping[str, Any]) -> ScenarioConfig:
    return _validate(document, None)


def _validate(document: Mapping[str, Any], node: Optional[yaml.Node]) -> ScenarioConfig:
    top = _check(_TOP_LEVEL, document, node, ())

    realization = dict(top["realization"])
    kind = realization.pop("kind")
    params = _check(_REALIZATION_SCHEMAS[kind], realization, node, ("realization",))

    target = dict(top["target"])
    target_kind = target.pop("kind")
    target_params = _check(_TARGET_SCHEMAS[target_kind], target, node, ("target",))

    sweep = None
    if "sweep" in top:
        values = _check(_SWEEP_SCHEMA, top["sweep"], node, ("sweep",))
        sweep = SweepSpec(**values)
        _check_sweep_fits(sweep, kind, target_kind, node)

    return ScenarioConfig(
        realization=kind,
        params=params,
        target=TargetSpec(kind=target_kind, params=target_params),
        sweep=sweep,
        seed=top.get("seed", 0),
        grid=top.get("grid", DEFAULT_GRID),
    )


def _check_sweep_fits(sweep: SweepSpec, realization: str, target_kind: str, node: Optional[yaml.Node]) -> None:
    fits = {
        "werner_p": target_kind == "werner",
        "gt": realization in ("spin-singlet", "spin-triplet-effective", "spin-phi-rotated"),
        "detection_cosine": realization == "young",
    }[sweep.parameter]
    if not fits:
        path = ("sweep", "parameter")
        raise ConfigError(
            f"sweep parameter {sweep.parameter} does not apply to realization {realization} with a {target_kind} target",
            field=".".join(path),
            line=_line_of(node, path),
        )
    if sweep.parameter in ("werner_p", "detection_cosine") and not (
        0.0 <= min(sweep.start, sweep.stop) and max(sweep.start, sweep.stop) <= 1.0
    ):
        raise ConfigError(f"{sweep.parameter} sweep must stay within [0, 1]", field="sweep", line=_line_of(node, ("sweep",)))


def _check(schema: Schema, data: Any, node: Optional[yaml.Node], path: tuple[str, ...]) -> dict[str, Any]:
    try:
        return schema.validate(data)
    except SchemaError as e:
        key = _offending_key(e, data)
        full = path + ((key,) if key else ())
        raise ConfigError(
            f"invalid {'.'.join(full) or 'config'}: {e.code}",
            field=".".join(full) or None,
            line=_line_of(node, full),
        ) from e


def _offending_key(error: SchemaError, data: Any) -> Optional[str]:
    """First mapping key named by the schema error messages."""
    if not isinstance(data, Mapping):
        return None
    for message in error.autos:
        match = _KEY_IN_MESSAGE.search(str(message or ""))
        if match:
            return match.group(1)
    return None


def _line_of(node: Optional[yaml.Node], path: tuple[str, ...]) -> Optional[int]:
    """1-based line of the deepest key of `path` found in the composed YAML tree."""
    line = None
    for key in path:
        if not isinstance(node, yaml.MappingNode):
            break
        for key_node, value_node in node.value:
            if key_node.value == key:
                line = key_node.start_mark.line + 1
                node = value_node
                break
        else:
            break
    return line
