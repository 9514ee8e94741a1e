"""Experiment configuration files.

Format: ``key = value`` lines. Keys before any section header are the
experiment settings; ``[model]`` holds the channel model and
``[iterative]`` the alternating benchmark settings. ``#`` and ``;`` start
comments. Unknown keys and sections are rejected.

Defaults::

    trials = 500        seed = 42           snr_db = 0:5:30
    hops = 3            objective = sum-mse mode = lower
    [model]     alpha_t = 0.45, beta_r = 0.45, sigma_e2 = 0.001, n_t = 4, n_r = 4
    [iterative] max_iters = 500, tol = 1e-10

``snr_db`` accepts ``start:step:stop`` (inclusive) or a comma list.
The environment variable ``MMO_SEED`` overrides ``seed``.
"""

from __future__ import annotations

import configparser
import enum
import os
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

import numpy as np

from .channel import ExpCorrModel
from .core import BoundMode
from .objectives import named_scalar_objectives

__all__ = ["Experiment", "ExperimentConfig", "ConfigError", "parse_config", "parse_snr_grid", "load_config"]

_TOP = "settings"


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n  " + "\n  ".join(self.problems))


class Experiment(enum.Enum):
    BOUND_GAP = "bound-gap"
    SUM_MSE_COMPARE = "sum-mse-compare"
    MULTIHOP_CAPACITY = "multihop-capacity"
    MULTIHOP_MAX_MSE = "multihop-max-mse"
    SOLVE = "solve"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    model: ExpCorrModel = field(default_factory=ExpCorrModel)
    snr_db_grid: tuple = tuple(range(0, 31, 5))
    trials: int = 500
    seed: int = 42
    hops: int = 3
    objective: str = "sum-mse"
    mode: BoundMode = BoundMode.LOWER
    output_path: Optional[str] = None
    iter_max: int = 500
    iter_tol: float = 1e-10


_KEYS = {
    _TOP: {"experiment", "snr_db", "trials", "seed", "hops", "objective", "mode", "output"},
    "model": {"alpha_t", "beta_r", "sigma_e2", "n_t", "n_r"},
    "iterative": {"max_iters", "tol"},
}


def parse_snr_grid(text: str) -> tuple:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError("range must be start:step:stop")
        start, step, stop = parts
        if step <= 0:
            raise ValueError("range step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + i * step for i in range(max(n, 0))]
    else:
        vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise ValueError("grid is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("grid must be strictly increasing")
    return tuple(int(v) if float(v).is_integer() else v for v in vals)


def _line_numbers(text: str) -> dict:
    where, section = {}, _TOP
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = i
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m:
            where[(section, m.group(1).strip().lower())] = i
    return where


def parse_config(path: str, text: Optional[str] = None) -> ExperimentConfig:
    if text is None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError([f"{path}: cannot read ({exc.strerror})"]) from exc
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#", ";"), delimiters=("=",))
    try:
        cp.read_string(f"[{_TOP}]\n" + text, source=path)
    except configparser.Error as exc:
        raise ConfigError([f"{path}: {exc}".replace("\n", " ")]) from exc
    lines = _line_numbers(text)
    problems: list[str] = []

    def where(section, key=None):
        n = lines.get((section, key))
        return f"{path}:{n}" if n else path

    for section in cp.sections():
        if section not in _KEYS:
            problems.append(f"{where(section)}: unknown section [{section}]")
            continue
        for key in cp[section]:
            if key not in _KEYS[section]:
                scope = "top level" if section == _TOP else f"[{section}]"
                problems.append(f"{where(section, key)}: unknown key '{key}' in {scope}")

    def get(section, key, conv, default):
        if not cp.has_section(section) or key not in cp[section]:
            return default
        raw = cp[section][key]
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            problems.append(f"{where(section, key)}: {key}: {exc}")
            return default

    top = _TOP
    experiment = None
    if "experiment" not in cp[top]:
        problems.append(f"{path}: missing required field 'experiment'")
    else:
        experiment = get(top, "experiment", lambda s: Experiment(s.strip().lower()), None)

    def positive_int(s):
        v = int(s)
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    def objective(s):
        s = s.strip().lower()
        if s not in named_scalar_objectives():
            raise ValueError(f"unknown objective {s!r}")
        return s

    snr = get(top, "snr_db", parse_snr_grid, tuple(range(0, 31, 5)))
    trials = get(top, "trials", positive_int, 500)
    seed = get(top, "seed", int, 42)
    hops = get(top, "hops", positive_int, 3)
    obj = get(top, "objective", objective, "sum-mse")
    mode = get(top, "mode", BoundMode.parse, BoundMode.LOWER)
    output = get(top, "output", str.strip, None)
    model_kw = {
        "alpha_t": get("model", "alpha_t", float, 0.45),
        "beta_r": get("model", "beta_r", float, 0.45),
        "sigma_e2": get("model", "sigma_e2", float, 0.001),
        "n_t": get("model", "n_t", positive_int, 4),
        "n_r": get("model", "n_r", positive_int, 4),
    }
    iter_max = get("iterative", "max_iters", positive_int, 500)
    iter_tol = get("iterative", "tol", float, 1e-10)
    if not iter_tol > 0:
        problems.append(f"{where('iterative', 'tol')}: tol: must be positive")
    model = None
    try:
        model = ExpCorrModel(**model_kw)
    except ValueError as exc:
        problems.append(f"{where('model')}: model: {exc}")
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        experiment=experiment, model=model, snr_db_grid=snr, trials=trials, seed=seed,
        hops=hops, objective=obj, mode=mode, output_path=output, iter_max=iter_max,
        iter_tol=iter_tol,
    )


def load_config(path: str, env: Mapping[str, str] = os.environ) -> ExperimentConfig:
    """parse_config plus the MMO_SEED override."""
    cfg = parse_config(path)
    raw = env.get("MMO_SEED")
    if raw is not None and raw.strip():
        try:
            seed = int(raw)
        except ValueError:
            raise ConfigError([f"MMO_SEED: not an integer: {raw!r}"]) from None
        cfg = replace(cfg, seed=seed)
    return cfg
