"""Runtime configuration: config files plus environment overrides.

Config files are JSON or TOML with the same shape::

    {
      "perturb":  {"seed": 0, "severity": 0.35, "kinds": ["position_shift", ...],
                   "magnitudes": {"position_shift_min_frac": 0.02, ...}},
      "backend":  {"mode": "heuristic",            # heuristic | remote
                   "remote": {"endpoint": "http://...", "model": "...",
                              "temperature": 0.2, "max_tokens": 2048,
                              "max_attempts": 2}},
      "service":  {"data_dir": "sessions"}
    }

Environment variables override remote-endpoint settings:
``SLIDELOOP_REMOTE_ENDPOINT``, ``SLIDELOOP_REMOTE_MODEL``,
``SLIDELOOP_REMOTE_API_KEY``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

from .errors import SlideloopError
from .perturb import ALL_KINDS, MagnitudeTable, PerturbConfig, PerturbationKind
from .roles import (
    Contributor,
    HeuristicContributor,
    HeuristicReviewer,
    RemoteContributor,
    RemoteModelConfig,
    RemoteReviewer,
    Reviewer,
)

ENV_ENDPOINT = "SLIDELOOP_REMOTE_ENDPOINT"
ENV_MODEL = "SLIDELOOP_REMOTE_MODEL"
ENV_API_KEY = "SLIDELOOP_REMOTE_API_KEY"


class ConfigError(SlideloopError):
    kind = "config_error"


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # py3.11+
        except ModuleNotFoundError:
            try:
                import tomli as tomllib
            except ModuleNotFoundError:
                raise ConfigError("TOML config requires Python 3.11+ or the tomli package")
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML config: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON config: {exc}")


def perturb_config(
    data: dict,
    seed: int | None = None,
    severity: float | None = None,
    kinds: str | None = None,
) -> PerturbConfig:
    """Build a perturbation config from file data plus CLI overrides."""
    section = data.get("perturb", {})
    enabled = tuple(ALL_KINDS)
    raw_kinds = kinds.split(",") if kinds else section.get("kinds")
    if raw_kinds:
        try:
            enabled = tuple(PerturbationKind(k.strip()) for k in raw_kinds if k.strip())
        except ValueError as exc:
            raise ConfigError(f"unknown perturbation kind: {exc}")
        if not enabled:
            raise ConfigError("no perturbation kinds enabled")
    magnitudes = MagnitudeTable()
    overrides = section.get("magnitudes", {})
    known = {f.name for f in dataclasses.fields(MagnitudeTable)}
    bad = set(overrides) - known
    if bad:
        raise ConfigError(f"unknown magnitude settings: {sorted(bad)}")
    if overrides:
        if "reset_fonts" in overrides:
            overrides = dict(overrides, reset_fonts=tuple(overrides["reset_fonts"]))
        magnitudes = dataclasses.replace(magnitudes, **overrides)
    return PerturbConfig(
        seed=seed if seed is not None else section.get("seed", 0),
        severity=severity if severity is not None else section.get("severity", 0.35),
        enabled_kinds=enabled,
        magnitudes=magnitudes,
    )


def remote_model_config(data: dict) -> RemoteModelConfig:
    section = dict(data.get("backend", {}).get("remote", {}))
    endpoint = os.environ.get(ENV_ENDPOINT) or section.get("endpoint")
    model = os.environ.get(ENV_MODEL) or section.get("model")
    if not endpoint or not model:
        raise ConfigError(
            "remote backend needs an endpoint and model (config backend.remote or "
            f"{ENV_ENDPOINT}/{ENV_MODEL})"
        )
    return RemoteModelConfig(
        endpoint=endpoint,
        model=model,
        temperature=section.get("temperature", 0.2),
        max_tokens=section.get("max_tokens", 2048),
        max_attempts=section.get("max_attempts", 2),
        timeout=section.get("timeout", 60.0),
        api_key=os.environ.get(ENV_API_KEY) or section.get("api_key"),
    )


def build_backends(
    mode: str, data: dict | None = None
) -> tuple[Reviewer, Contributor]:
    """Reviewer/contributor pair for ``heuristic`` or ``remote`` mode.

    Oracle backends are not built here: they need a perturbation log and the
    original document, which only evaluation flows have.
    """
    data = data or {}
    if mode == "heuristic":
        return HeuristicReviewer(), HeuristicContributor()
    if mode == "remote":
        config = remote_model_config(data)
        return RemoteReviewer(config), RemoteContributor(config)
    raise ConfigError(f"unknown backend mode {mode!r} (expected heuristic or remote)")


__all__ = [
    "ConfigError",
    "build_backends",
    "load_config",
    "perturb_config",
    "remote_model_config",
]
