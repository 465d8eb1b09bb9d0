"""Multi-scale, multi-orientation log-Gabor filter bank in the Fourier domain.

Each kernel is separable in log-polar frequency coordinates: a radial factor
that is Gaussian on a logarithmic frequency axis, multiplied by a low-pass
Butterworth that kills the extra frequencies at the Fourier corners, times an
angular Gaussian centred on one orientation.  The zero-frequency sample of
every kernel is exactly zero, which makes responses invariant to constant
illumination shifts.

Kernels occupy a single angular half-plane per orientation, so spatial
responses obtained by inverse FFT are complex analytic signals; their modulus
is taken downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

BUTTERWORTH_CUTOFF = 0.45
BUTTERWORTH_ORDER = 15

ANGULAR_EXPONENTS = ("linear", "squared")


@dataclass(frozen=True)
class FrequencyGrid:
    """Per-sample normalized frequency coordinates in FFT layout.

    ``eta`` is the Euclidean norm of the normalized frequency coordinates
    (each axis spanning [-0.5, 0.5)), so it is 0 exactly at the DC sample
    (index [0, 0]) and at most sqrt(0.5) at the Fourier corners.  ``alpha``
    is the frequency angle in (-pi, pi].
    """

    width: int
    height: int
    eta: np.ndarray
    alpha: np.ndarray

    @property
    def dc_index(self) -> tuple[int, int]:
        return (0, 0)


def build_frequency_grid(width: int, height: int) -> FrequencyGrid:
    """Build the (eta, alpha) grid matching numpy's fft2 sample layout."""
    if width < 2 or height < 2:
        raise ParameterError(f"grid dimensions must be >= 2, got {width}x{height}")
    fx = np.fft.fftfreq(width)
    fy = np.fft.fftfreq(height)
    gx, gy = np.meshgrid(fx, fy)
    eta = np.hypot(gx, gy)
    alpha = np.arctan2(gy, gx)
    eta.setflags(write=False)
    alpha.setflags(write=False)
    return FrequencyGrid(width=width, height=height, eta=eta, alpha=alpha)


def butterworth(grid: FrequencyGrid, cutoff: float = BUTTERWORTH_CUTOFF,
                order: int = BUTTERWORTH_ORDER) -> np.ndarray:
    """Low-pass Butterworth magnitude 1/sqrt(1 + (eta/cutoff)^(2*order))."""
    if cutoff <= 0:
        raise ParameterError(f"butterworth cutoff must be > 0, got {cutoff}")
    if order < 1:
        raise ParameterError(f"butterworth order must be >= 1, got {order}")
    return 1.0 / np.sqrt(1.0 + (grid.eta / cutoff) ** (2 * order))


def radial_component(grid: FrequencyGrid, eta_s: float, sigma_eta: float,
                     cutoff: float = BUTTERWORTH_CUTOFF,
                     order: int = BUTTERWORTH_ORDER) -> np.ndarray:
    """Log-frequency Gaussian centred at eta_s, tapered by the Butterworth.

    The DC sample is set to 0 explicitly (the log-ratio is singular there,
    and suppressing DC is the point of the log-frequency design).
    """
    if not 0.0 < eta_s < 0.5:
        raise ParameterError(f"radial centre must lie in (0, 0.5), got {eta_s}")
    if not 0.0 < sigma_eta < 1.0:
        raise ParameterError(f"radial bandwidth must lie in (0, 1), got {sigma_eta}")
    out = np.zeros_like(grid.eta)
    nonzero = grid.eta > 0.0
    log_ratio = np.log(grid.eta[nonzero] / eta_s)
    out[nonzero] = np.exp(-(log_ratio ** 2) / (2.0 * np.log(sigma_eta) ** 2))
    out *= butterworth(grid, cutoff, order)
    return out


def angular_component(grid: FrequencyGrid, alpha_o: float, sigma_alpha: float,
                      exponent: str = "linear") -> np.ndarray:
    """Angular falloff around orientation alpha_o.

    The angular distance is wrapped into [0, pi] via atan2.  ``exponent``
    selects whether the wrapped distance enters the exponent linearly
    (the default) or squared (an ordinary Gaussian).
    """
    if sigma_alpha <= 0:
        raise ParameterError(f"angular bandwidth must be > 0, got {sigma_alpha}")
    if exponent not in ANGULAR_EXPONENTS:
        raise ParameterError(f"unknown angular exponent {exponent!r}")
    diff = grid.alpha - alpha_o
    dist = np.abs(np.arctan2(np.sin(diff), np.cos(diff)))
    if exponent == "squared":
        dist = dist ** 2
    return np.exp(-dist / (2.0 * sigma_alpha ** 2))


@dataclass(frozen=True)
class FilterBank:
    """S x O bank of nonnegative frequency-domain kernels.

    Kernels are separable products of per-scale radial factors and
    per-orientation angular factors; ``kernel(s, o)`` materializes one on
    demand, which keeps memory at O((S + O) * W * H) instead of
    O(S * O * W * H).  All kernel values lie in [0, 1] and the DC entry of
    every kernel is exactly 0.  Construction is deterministic: identical
    parameters give bit-identical kernels.
    """

    grid: FrequencyGrid
    scales: int
    orientations: int
    eta_centers: tuple[float, ...]
    alpha_centers: tuple[float, ...]
    sigma_eta: float
    sigma_alpha: float
    butterworth_cutoff: float
    butterworth_order: int
    angular_exponent: str
    radial_factors: np.ndarray
    angular_factors: np.ndarray

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def height(self) -> int:
        return self.grid.height

    def kernel(self, s: int, o: int) -> np.ndarray:
        """Frequency-domain kernel for scale index s and orientation index o."""
        return self.radial_factors[s] * self.angular_factors[o]

    def iter_kernels(self):
        """Yield (s, o, kernel) over the whole bank in lexicographic order."""
        for s in range(self.scales):
            for o in range(self.orientations):
                yield s, o, self.kernel(s, o)

    def centers(self) -> list[tuple[float, float]]:
        """All (eta_s, alpha_o) frequency centres in lexicographic order."""
        return [(es, ao) for es in self.eta_centers for ao in self.alpha_centers]


def scale_centers(scales: int, min_wavelength: float,
                  scale_multiplier: float) -> tuple[float, ...]:
    """Geometric radial centres 1/min_wavelength * multiplier^-(s-1)."""
    return tuple((1.0 / min_wavelength) * scale_multiplier ** (-s)
                 for s in range(scales))


def orientation_centers(orientations: int) -> tuple[float, ...]:
    """Orientation centres z*pi/O for z = 0..O-1."""
    return tuple(z * np.pi / orientations for z in range(orientations))


def build_filter_bank(width: int, height: int, scales: int = 12,
                      orientations: int = 32, sigma_eta: float = 0.55,
                      sigma_alpha: float = 0.2, min_wavelength: float = 3.0,
                      scale_multiplier: float = 1.45,
                      angular_exponent: str = "linear",
                      cutoff: float = BUTTERWORTH_CUTOFF,
                      order: int = BUTTERWORTH_ORDER) -> FilterBank:
    """Construct the full bank for a width x height image."""
    if scales < 1:
        raise ParameterError(f"scale count must be >= 1, got {scales}")
    if orientations < 1:
        raise ParameterError(f"orientation count must be >= 1, got {orientations}")
    if min_wavelength < 2:
        raise ParameterError(f"minimum wavelength must be >= 2 px, got {min_wavelength}")
    if scale_multiplier <= 1:
        raise ParameterError(f"scale multiplier must be > 1, got {scale_multiplier}")

    grid = build_frequency_grid(width, height)
    etas = scale_centers(scales, min_wavelength, scale_multiplier)
    if max(etas) >= 0.5:
        raise ParameterError(
            f"radial centre {max(etas):.4f} reaches the Nyquist limit 0.5 "
            f"(min_wavelength {min_wavelength} is too small)")
    alphas = orientation_centers(orientations)

    radial = np.stack([radial_component(grid, es, sigma_eta, cutoff, order)
                       for es in etas])
    angular = np.stack([angular_component(grid, ao, sigma_alpha, angular_exponent)
                        for ao in alphas])
    radial.setflags(write=False)
    angular.setflags(write=False)
    return FilterBank(grid=grid, scales=scales, orientations=orientations,
                      eta_centers=etas, alpha_centers=alphas,
                      sigma_eta=sigma_eta, sigma_alpha=sigma_alpha,
                      butterworth_cutoff=cutoff, butterworth_order=order,
                      angular_exponent=angular_exponent,
                      radial_factors=radial, angular_factors=angular)
