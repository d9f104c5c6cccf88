"""Run configuration: a flat ``key = value`` text format plus CLI overrides.

The format is deliberately trivial — one ``key = value`` per line,
``#`` comments allowed — so sweep configurations can be generated by
anything.  Every key has a documented default; CLI flags override file
values; unknown keys and out-of-range values are rejected with messages
that name the key and its bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .chains import ValidationError
from .contention import ORACLE_BOUND, validate_scheme
from .handoff import ModelParams
from .simulator import SimConfig

COMMANDS = ("analytic", "simulate", "sweep", "validate", "oracle", "report")

#: Keys whose values may be swept over a grid.
SWEEPABLE = ("M", "N", "c", "h", "p", "s", "v", "Ts")


def _parse_int(key: str, raw: str, lo: int = 1, hi: Optional[int] = None) -> int:
    try:
        val = int(raw)
    except ValueError:
        raise ValidationError(f"{key} must be an integer (got {raw!r})") from None
    if val < lo or (hi is not None and val > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise ValidationError(f"{key} must be {bound} (got {raw})")
    return val


def _parse_float(key: str, raw: str, lo: float, hi: float, *, lo_open: bool = False) -> float:
    try:
        val = float(raw)
    except ValueError:
        raise ValidationError(f"{key} must be a number (got {raw!r})") from None
    if (val <= lo if lo_open else val < lo) or val > hi:
        left = "(" if lo_open else "["
        raise ValidationError(f"{key} must be in {left}{lo}, {hi}] (got {raw})")
    return val


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValidationError(f"{key} must be true or false (got {raw!r})")


_CONVERTERS = {
    "M": lambda raw: _parse_int("M", raw),
    "N": lambda raw: _parse_int("N", raw),
    "c": lambda raw: _parse_int("c", raw),
    "h": lambda raw: _parse_int("h", raw),
    "p": lambda raw: _parse_float("p", raw, 0.0, 1.0),
    "s": lambda raw: _parse_float("s", raw, 0.0, 1.0),
    "v": lambda raw: _parse_float("v", raw, 0.0, 1.0, lo_open=True),
    "Ts": lambda raw: _parse_int("Ts", raw),
    "scheme": lambda raw: validate_scheme(raw.strip()),
    "slots": lambda raw: _parse_int("slots", raw),
    "warmup": lambda raw: _parse_int("warmup", raw, lo=0),
    "seed": lambda raw: _parse_int("seed", raw, lo=0),
    "tolerance": lambda raw: _parse_float("tolerance", raw, 0.0, float("inf"), lo_open=True),
    "exclude_su_occupied": lambda raw: _parse_bool("exclude_su_occupied", raw),
    "saturated": lambda raw: _parse_bool("saturated", raw),
    "oracle_n1": lambda raw: _parse_int("oracle_n1", raw, 1, ORACLE_BOUND),
    "oracle_theta": lambda raw: _parse_int("oracle_theta", raw, 1, ORACLE_BOUND),
    "trace_out": lambda raw: raw.strip(),
    "sweep": None,  # handled after the model keys are known
}

DEFAULTS = {
    "M": 10,
    "N": 2,
    "c": 10,
    "h": 1,
    "p": 0.05,
    "s": 1.0,
    "v": 0.1,
    "Ts": None,  # resolves to c
    "scheme": "random",
    "slots": 10**6,
    "warmup": 10**5,
    "seed": 1,
    "tolerance": 0.08,
    "exclude_su_occupied": True,
    "saturated": False,
    "oracle_n1": 6,
    "oracle_theta": 6,
    "trace_out": None,
    "sweep": None,
}


@dataclass(frozen=True)
class RunSpec:
    """A fully validated command invocation."""

    command: str
    sim: SimConfig
    tolerance: float
    sweep: Optional[tuple]  # (key, (value, ...)) or None
    oracle_n1: int
    oracle_theta: int
    trace_out: Optional[str]
    out: Optional[str]
    model_values: dict = None

    @property
    def params(self) -> ModelParams:
        return self.sim.params

    def params_for(self, key: str, value) -> ModelParams:
        """Model parameters with one swept key replaced.

        Rebuilt from the configured values so that a defaulted Ts keeps
        following c when c itself is swept.
        """
        vals = dict(self.model_values)
        vals[key] = value
        return _build_params(vals)


def _build_params(vals: dict) -> ModelParams:
    return ModelParams(
        M=vals["M"],
        N=vals["N"],
        c=vals["c"],
        h=vals["h"],
        p=vals["p"],
        s=vals["s"],
        v=vals["v"],
        t_s=vals["Ts"],
        scheme=vals["scheme"],
    )


def _parse_sweep(raw: str) -> tuple:
    head, sep, tail = raw.partition(":")
    key = head.strip()
    if not sep or key not in SWEEPABLE:
        raise ValidationError(
            f"sweep must look like 'p:0.01,0.05,0.1' with a key from {SWEEPABLE} "
            f"(got {raw!r})"
        )
    values = tuple(_CONVERTERS[key](part.strip()) for part in tail.split(","))
    if not values:
        raise ValidationError("sweep needs at least one value")
    return key, values


def parse_config(
    text: str,
    *,
    command: str = "analytic",
    overrides: Optional[dict] = None,
    out: Optional[str] = None,
) -> RunSpec:
    """Parse config text, apply CLI overrides, and validate everything.

    ``overrides`` maps keys to raw string values (as typed on the
    command line); they win over file values.  Raises
    :class:`ValidationError` naming the offending key for an unknown
    key, a malformed value, or an out-of-range value.
    """
    if command not in COMMANDS:
        raise ValidationError(f"command must be one of {COMMANDS} (got {command!r})")

    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValidationError(f"line {lineno}: expected 'key = value' (got {line!r})")
        raw[key.strip()] = value.strip()
    for key, value in (overrides or {}).items():
        raw[key] = value

    values = dict(DEFAULTS)
    sweep_raw = None
    for key, text_value in raw.items():
        if key not in _CONVERTERS:
            known = ", ".join(sorted(_CONVERTERS))
            raise ValidationError(f"unknown key {key!r}; valid keys are: {known}")
        if key == "sweep":
            sweep_raw = text_value
        else:
            values[key] = _CONVERTERS[key](text_value)

    model_values = {key: values[key] for key in (*SWEEPABLE, "scheme")}
    params = _build_params(model_values)
    sim = SimConfig(
        params=params,
        slots=values["slots"],
        warmup=values["warmup"],
        seed=values["seed"],
        exclude_su_occupied=values["exclude_su_occupied"],
        saturated=values["saturated"],
        trace=values["trace_out"] is not None,
    )
    sweep = _parse_sweep(sweep_raw) if sweep_raw is not None else None
    return RunSpec(
        command=command,
        sim=sim,
        tolerance=values["tolerance"],
        sweep=sweep,
        oracle_n1=values["oracle_n1"],
        oracle_theta=values["oracle_theta"],
        trace_out=values["trace_out"],
        out=out,
        model_values=model_values,
    )
