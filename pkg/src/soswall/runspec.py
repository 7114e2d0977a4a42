"""Flat key=value run-spec files.

Grammar: one `key = value` assignment per line; blank lines and lines
starting with '#' are ignored; keys must belong to the command's schema;
unknown keys are an error.  Values are parsed by the declared type.
"""

from __future__ import annotations

from .errors import SpecFileError

_MISSING = object()


def _bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s}")


# command -> key -> (parser, default); default _MISSING means required
SCHEMAS = {
    "scan": {
        "J": (float, 1.0),
        "epsilon": (float, 0.5),
        "k": (int, 8),
        "order": (int, 6),
        "h_max": (int, 3),
        "n_max": (int, 4),
        "out": (str, None),
        "t_min": (float, None),
        "t_max": (float, None),
        "t_count": (int, None),
        "u_min": (float, None),
        "u_max": (float, None),
        "u_count": (int, None),
        "K_min": (float, None),
        "K_max": (float, None),
        "K_count": (int, None),
        "beta_min": (float, None),
        "beta_max": (float, None),
        "beta_count": (int, None),
    },
    "simulate": {
        "width": (int, _MISSING),
        "height": (int, _MISSING),
        "boundary": (int, 0),
        "t": (float, None),
        "u": (float, None),
        "J": (float, 1.0),
        "K": (float, None),
        "beta": (float, None),
        "sweeps": (int, _MISSING),
        "burn_in": (int, 0),
        "thin": (int, 1),
        "seed": (int, 0),
        "z_max": (int, None),
        "sampler": (str, "heat_bath"),
        "out": (str, None),
        "dump": (str, None),
    },
    "oracle": {
        "width": (int, _MISSING),
        "height": (int, _MISSING),
        "boundary": (int, 0),
        "height_cap": (int, _MISSING),
        "cap_tolerance": (float, 1e-9),
        "t": (float, None),
        "u": (float, None),
        "J": (float, 1.0),
        "K": (float, None),
        "beta": (float, None),
        "z_max": (int, 4),
    },
}


def parse_spec(text: str, command: str) -> dict:
    schema = SCHEMAS.get(command)
    if schema is None:
        raise SpecFileError(f"no spec schema for command {command!r}")
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SpecFileError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in schema:
            raise SpecFileError(f"line {lineno}: unknown key {key!r} for {command}")
        if key in out:
            raise SpecFileError(f"line {lineno}: duplicate key {key!r}")
        parser, _default = schema[key]
        try:
            out[key] = parser(value)
        except ValueError as exc:
            raise SpecFileError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    for key, (_parser, default) in schema.items():
        if key not in out:
            if default is _MISSING:
                raise SpecFileError(f"missing required key {key!r} for {command}")
            out[key] = default
    return out


def resolve_params_keys(spec: dict) -> tuple[float, float, float]:
    """(t, u, J) from a spec carrying either (t, u) or (J, K, beta)."""
    from .params import ModelParams

    has_tu = spec.get("t") is not None and spec.get("u") is not None
    has_couplings = spec.get("K") is not None and spec.get("beta") is not None
    if has_tu == has_couplings:
        raise SpecFileError("give exactly one of (t, u) or (K, beta) [with J]")
    if has_tu:
        return spec["t"], spec["u"], spec.get("J") or 1.0
    p = ModelParams.from_couplings(J=spec["J"], K=spec["K"], beta=spec["beta"])
    return p.t, p.u, p.J
