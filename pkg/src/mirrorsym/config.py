"""Pipeline configuration: published defaults, flat key=value files, overrides.

Every key mirrors one module parameter.  Values are validated against the
module preconditions at load time so a bad config fails before any image
work starts.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ParameterError
from .filterbank import ANGULAR_EXPONENTS


@dataclass(frozen=True)
class Config:
    scales: int = 12
    orientations: int = 32
    sigma_eta: float = 0.55
    sigma_alpha: float = 0.2
    min_wavelength: float = 3.0
    scale_multiplier: float = 1.45
    angular_exponent: str = "linear"
    butterworth_cutoff: float = 0.45
    butterworth_order: int = 15
    cell_divisor: int = 64
    homogeneity_threshold: float = 0.05
    textural_bins: int = 32
    color_hue_bins: int = 8
    color_sat_bins: int = 2
    color_val_bins: int = 2
    color_window_factor: float = 2.0
    saturation_threshold: float = 0.05
    max_features: int = 2500
    smooth_sigma_rho: float = 2.0
    smooth_sigma_theta: float = 2.0
    nms_rho_window: int = 11
    nms_theta_window: int = 11
    max_peaks: int = 10
    deterministic: bool = True

    @property
    def color_layout(self) -> tuple[int, int, int]:
        return (self.color_hue_bins, self.color_sat_bins, self.color_val_bins)

    @property
    def color_bins(self) -> int:
        return self.color_hue_bins * self.color_sat_bins * self.color_val_bins

    @property
    def nms_window(self) -> tuple[int, int]:
        return (self.nms_rho_window, self.nms_theta_window)

    def validate(self) -> "Config":
        checks = [
            (self.scales >= 1, "scales must be >= 1"),
            (self.orientations >= 1, "orientations must be >= 1"),
            (0.0 < self.sigma_eta < 1.0, "sigma_eta must lie in (0, 1)"),
            (self.sigma_alpha > 0.0, "sigma_alpha must be > 0"),
            (self.min_wavelength >= 2.0, "min_wavelength must be >= 2"),
            (self.scale_multiplier > 1.0, "scale_multiplier must be > 1"),
            (self.angular_exponent in ANGULAR_EXPONENTS,
             f"angular_exponent must be one of {ANGULAR_EXPONENTS}"),
            (self.butterworth_cutoff > 0.0, "butterworth_cutoff must be > 0"),
            (self.butterworth_order >= 1, "butterworth_order must be >= 1"),
            (self.cell_divisor >= 1, "cell_divisor must be >= 1"),
            (0.0 <= self.homogeneity_threshold < 1.0,
             "homogeneity_threshold must lie in [0, 1)"),
            (self.textural_bins >= 2, "textural_bins must be >= 2"),
            (min(self.color_layout) >= 1, "color layout components must be >= 1"),
            (self.color_window_factor > 0.0, "color_window_factor must be > 0"),
            (0.0 <= self.saturation_threshold <= 1.0,
             "saturation_threshold must lie in [0, 1]"),
            (self.max_features >= 0, "max_features must be >= 0 (0 = unlimited)"),
            (self.smooth_sigma_rho > 0.0, "smooth_sigma_rho must be > 0"),
            (self.smooth_sigma_theta > 0.0, "smooth_sigma_theta must be > 0"),
            (self.nms_rho_window >= 1 and self.nms_rho_window % 2 == 1,
             "nms_rho_window must be odd and >= 1"),
            (self.nms_theta_window >= 1 and self.nms_theta_window % 2 == 1,
             "nms_theta_window must be odd and >= 1"),
            (self.max_peaks >= 1, "max_peaks must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ParameterError(f"config: {message}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def with_overrides(self, overrides: dict) -> "Config":
        """New Config with string/typed overrides applied and re-validated."""
        if not overrides:
            return self.validate()
        types = {f.name: f.type for f in dataclasses.fields(self)}
        coerced = {}
        for key, value in overrides.items():
            if key not in types:
                raise ParameterError(f"unknown config key {key!r}")
            coerced[key] = _coerce(key, value, types[key])
        return dataclasses.replace(self, **coerced).validate()


_PARSERS = {"int": int, "float": float, "str": str}


def _coerce(key, value, type_name):
    if type_name == "bool":
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"config key {key!r}: cannot parse bool from {value!r}")
    try:
        return _PARSERS[type_name](value)
    except (KeyError, TypeError, ValueError):
        raise ParameterError(
            f"config key {key!r}: cannot parse {type_name} from {value!r}") from None


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> Config:
    """Defaults, then key=value file entries, then explicit overrides."""
    from_file = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{number}: expected key = value")
            key, _, value = line.partition("=")
            from_file[key.strip()] = value.strip()
    merged = dict(from_file)
    merged.update(overrides or {})
    return Config().with_overrides(merged)
