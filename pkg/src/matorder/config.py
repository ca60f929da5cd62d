"""Global numerical defaults and their loading from files and the environment.

All cone tests reduce to one relative PSD tolerance, so it lives here
together with the optimizer defaults. Values can be overridden from a JSON
or TOML-style key/value file and, for the seed only, from the environment
variable ``MATORDER_SEED``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

SEED_ENV_VAR = "MATORDER_SEED"


@dataclasses.dataclass
class Settings:
    """Tunable defaults shared by every module.

    :param psd_tol: PSD tolerance relative to the trace norm of the tested matrix.
    :param restarts: number of random restarts for multi-start optimizers.
    :param iterations: iteration cap per restart.
    :param seed: default random seed.
    :param budget: default sample budget for probes and property runners.
    """

    psd_tol: float = 1e-9
    restarts: int = 32
    iterations: int = 500
    seed: int = 0
    budget: int = 200


settings = Settings()


def _parse_scalar(text: str):
    text = text.strip().strip('"').strip("'")
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_config_file(path) -> dict:
    """Read a flat key/value config file.

    JSON objects are accepted directly. Otherwise the file is read as simple
    ``key = value`` lines (the flat subset of TOML); ``#`` starts a comment and
    section headers are ignored.
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return dict(json.loads(text))
    values = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = _parse_scalar(value)
    return values


def resolve_settings(path=None, environ=None) -> Settings:
    """Return defaults updated by an optional config file and the seed env var."""
    environ = os.environ if environ is None else environ
    resolved = dataclasses.replace(settings)
    if path is not None:
        known = {f.name for f in dataclasses.fields(Settings)}
        for key, value in read_config_file(path).items():
            if key not in known:
                raise ValueError(f"unknown config key: {key}")
            field_type = type(getattr(resolved, key))
            setattr(resolved, key, field_type(value))
    if environ.get(SEED_ENV_VAR):
        resolved.seed = int(environ[SEED_ENV_VAR])
    return resolved
