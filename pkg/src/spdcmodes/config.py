"""Flat key=value run settings shared by the CLI and the bundle writer.

A settings file is plain text, one `key=value` per line, `#` comments and
blank lines ignored. Every key has a typed default; unknown keys are
rejected so typos fail loudly. Command-line `--set key=value` overrides
win over the file, which wins over the defaults.
"""

from __future__ import annotations

import math

from .errors import DataError, DomainError, FormatError
from .optics import CrystalPumpConfig, collinear_angle
from .simulate import QuadratureSettings, WavevectorGrid

__all__ = [
    "SCHEMA",
    "parse_keyvalues",
    "format_keyvalues",
    "coerce_settings",
    "load_settings",
    "echo_settings",
    "build_config",
    "build_grid",
    "build_quadrature",
]

# key -> (type tag, default as string). Empty string means "auto" for the
# opt* tags.
SCHEMA: dict[str, tuple[str, str]] = {
    "lambda_p": ("float", "0.355"),
    "lambda_s": ("float", "0.700"),
    "crystal_length_um": ("float", "3000.0"),
    "pump_waist_um": ("float", "185.0"),
    "gain": ("float", "1.49"),
    "pump_angle_deg": ("optfloat", ""),
    "angle_offset_deg": ("float", "0.053"),
    "c1": ("float", "1.0"),
    "c2": ("optfloat", ""),
    "gain_scale": ("float", "2.4"),
    "n_points": ("int", "256"),
    "pitch_mrad": ("float", "0.625"),
    "quad_nodes": ("int", "256"),
    "quad_rel_tol": ("float", "1e-6"),
    "quad_max_doublings": ("int", "5"),
    "quad_cutoff_waists": ("float", "5.0"),
    "n_frames": ("int", "2000"),
    "seed": ("int", "1234"),
    "noise_sigma": ("float", "0.0"),
    "offset": ("float", "0.0"),
    "quantize": ("bool", "false"),
    "n_angles": ("int", "16"),
    "variant": ("str", "sqrt-then-subtract"),
    "n_modes": ("int", "6"),
    "gains": ("floatlist", "1.18,1.38,1.58,1.78"),
    "bench_sizes": ("intlist", "16,32,64"),
    "bench_frames": ("int", "1000"),
    "bench_top": ("int", "8"),
    "bench_repeats": ("int", "3"),
}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def parse_keyvalues(text: str, source: str = "settings") -> dict[str, str]:
    """Raw key=value pairs from text; duplicate keys keep the last value."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{source}, line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise FormatError(f"{source}, line {lineno}: empty key")
        out[key] = value.strip()
    return out


def format_keyvalues(pairs: dict[str, object]) -> str:
    """Deterministic key=value text, keys sorted."""
    return "\n".join(f"{k}={pairs[k]}" for k in sorted(pairs)) + "\n"


def _coerce_one(key: str, tag: str, raw: str):
    try:
        if tag == "float":
            return float(raw)
        if tag == "optfloat":
            return None if raw == "" else float(raw)
        if tag == "int":
            return int(raw)
        if tag == "bool":
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if tag == "floatlist":
            return tuple(float(p) for p in raw.split(",") if p.strip() != "")
        if tag == "intlist":
            return tuple(int(p) for p in raw.split(",") if p.strip() != "")
        return raw
    except ValueError as exc:
        raise DataError(f"setting {key}: cannot parse {raw!r} as {tag}") from exc


def coerce_settings(raw: dict[str, str]) -> dict:
    """Typed settings from raw strings, defaults filled in, unknown keys rejected."""
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise DomainError(f"unknown settings: {', '.join(unknown)}")
    out = {}
    for key, (tag, default) in SCHEMA.items():
        out[key] = _coerce_one(key, tag, raw.get(key, default))
    return out


def load_settings(
    file_text: str | None = None, overrides: dict[str, str] | None = None
) -> dict:
    """Defaults, then file values, then explicit overrides."""
    raw: dict[str, str] = {}
    if file_text is not None:
        raw.update(parse_keyvalues(file_text, source="settings file"))
    if overrides:
        raw.update(overrides)
    return coerce_settings(raw)


def echo_settings(settings: dict) -> dict[str, str]:
    """Settings rendered back to strings, round-trippable through parsing."""
    out: dict[str, str] = {}
    for key, (tag, _) in SCHEMA.items():
        val = settings[key]
        if tag == "optfloat":
            out[key] = "" if val is None else repr(float(val))
        elif tag == "bool":
            out[key] = "true" if val else "false"
        elif tag in ("floatlist", "intlist"):
            out[key] = ",".join(repr(v) if tag == "floatlist" else str(v) for v in val)
        elif tag == "float":
            out[key] = repr(float(val))
        else:
            out[key] = str(val)
    return out


def build_config(settings: dict) -> CrystalPumpConfig:
    """Crystal/pump configuration from settings.

    The pump angle defaults to the collinear angle minus angle_offset_deg;
    the coupling defaults to the gain_scale calibration (handled inside
    CrystalPumpConfig when c2 is left blank and gain_scale is the package
    default; otherwise scaled here).
    """
    theta = settings["pump_angle_deg"]
    if theta is None:
        theta = (
            collinear_angle(settings["lambda_p"], settings["lambda_s"])
            - settings["angle_offset_deg"]
        )
    c2 = settings["c2"]
    base = CrystalPumpConfig(
        lambda_p=settings["lambda_p"],
        lambda_s=settings["lambda_s"],
        L=settings["crystal_length_um"],
        w_p=settings["pump_waist_um"],
        g=settings["gain"],
        theta_p=theta,
        C1=settings["c1"],
        C2=c2,
    )
    if c2 is None and not math.isclose(settings["gain_scale"], 2.4):
        from .optics import calibrate_c2

        base = CrystalPumpConfig(
            lambda_p=base.lambda_p,
            lambda_s=base.lambda_s,
            L=base.L,
            w_p=base.w_p,
            g=base.g,
            theta_p=base.theta_p,
            C1=base.C1,
            C2=calibrate_c2(base, settings["gain_scale"]),
        )
    return base


def build_grid(settings: dict) -> WavevectorGrid:
    return WavevectorGrid(
        n_points=settings["n_points"], pitch_mrad=settings["pitch_mrad"]
    )


def build_quadrature(settings: dict) -> QuadratureSettings:
    return QuadratureSettings(
        nodes=settings["quad_nodes"],
        rel_tol=settings["quad_rel_tol"],
        max_doublings=settings["quad_max_doublings"],
        cutoff_waists=settings["quad_cutoff_waists"],
    )
