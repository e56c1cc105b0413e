"""Synthetic two-dimensional datasets with a tunable sensitive-attribute bias.

Both generators draw ±1 labels uniformly, sample the features from
class-conditional Gaussians (a single Gaussian per class for the linearly
separable variant, a two-component mixture per class for the nonlinear one)
and then attach a binary sensitive attribute whose correlation with the label
is controlled by a rotation angle ``phi``: the attribute is a Bernoulli draw
of the class-posterior evaluated at the rotated feature vector, so small
angles give a strongly aligned attribute and phi = pi/2 a nearly independent
one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .data import Dataset

__all__ = ["SynthConfig", "gen_linear_synthetic", "gen_nonlinear_synthetic", "generate"]

# class-conditional Gaussians of the linear variant; these also define the
# class posterior used to sample the sensitive attribute in both variants
MEAN_POS = np.array([2.0, 2.0])
COV_POS = np.array([[5.0, 1.0], [1.0, 5.0]])
MEAN_NEG = np.array([-2.0, -2.0])
COV_NEG = np.array([[10.0, 1.0], [1.0, 3.0]])

# mixture components of the nonlinear variant (selected by a fair coin beta);
# the negative-class matrices are symmetrized since a covariance must be
MIX_POS = ((MEAN_POS, COV_POS), (MEAN_NEG, COV_NEG))
_RAW_NEG_A = np.array([[4.0, 4.0], [2.0, 5.0]])
_RAW_NEG_B = np.array([[6.0, 2.0], [2.0, 3.0]])
MIX_NEG = (
    (np.array([4.0, -4.0]), (_RAW_NEG_A + _RAW_NEG_A.T) / 2.0),
    (np.array([-4.0, 6.0]), (_RAW_NEG_B + _RAW_NEG_B.T) / 2.0),
)


@dataclass(frozen=True)
class SynthConfig:
    n: int
    phi: float
    seed: int = 0
    variant: Literal["linear", "nonlinear"] = "linear"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0.0 < self.phi <= np.pi / 2.0:
            raise ValueError("phi must lie in (0, pi/2]")
        if self.variant not in ("linear", "nonlinear"):
            raise ValueError("variant must be 'linear' or 'nonlinear'")


def _gauss_density(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    diff = x - mean
    inv = np.linalg.inv(cov)
    quad = np.einsum("ij,jk,ik->i", diff, inv, diff)
    norm = 1.0 / (2.0 * np.pi * np.sqrt(np.linalg.det(cov)))
    return norm * np.exp(-0.5 * quad)


def _rotate(x: np.ndarray, phi: float) -> np.ndarray:
    rot = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    return x @ rot.T


def _sample_sensitive(rng: np.random.Generator, x: np.ndarray, phi: float) -> np.ndarray:
    x_rot = _rotate(x, phi)
    p_pos = _gauss_density(x_rot, MEAN_POS, COV_POS)
    p_neg = _gauss_density(x_rot, MEAN_NEG, COV_NEG)
    p = p_pos / (p_pos + p_neg)
    return (rng.random(x.shape[0]) < p).astype(float)


def _sample_sensitive_mixture(rng: np.random.Generator, x: np.ndarray, phi: float) -> np.ndarray:
    # class-posterior of the mixture model itself, evaluated at the rotated
    # point, so the attribute tracks the nonlinear class structure
    x_rot = _rotate(x, phi)
    p_pos = 0.5 * _gauss_density(x_rot, *MIX_POS[0]) + 0.5 * _gauss_density(x_rot, *MIX_POS[1])
    p_neg = 0.5 * _gauss_density(x_rot, *MIX_NEG[0]) + 0.5 * _gauss_density(x_rot, *MIX_NEG[1])
    p = p_pos / (p_pos + p_neg)
    return (rng.random(x.shape[0]) < p).astype(float)


def _finish(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> Dataset:
    return Dataset(
        features=x,
        labels=y,
        sensitive=z.reshape(-1, 1),
        sensitive_names=("z",),
        feature_names=("x1", "x2"),
    )


def gen_linear_synthetic(config: SynthConfig) -> Dataset:
    """Two Gaussian classes plus a rotation-biased binary sensitive attribute."""
    if config.variant != "linear":
        raise ValueError("config.variant must be 'linear'")
    rng = np.random.default_rng(config.seed)
    y = np.where(rng.random(config.n) < 0.5, 1.0, -1.0)
    x = np.empty((config.n, 2))
    pos = y == 1.0
    x[pos] = rng.multivariate_normal(MEAN_POS, COV_POS, size=int(pos.sum()))
    x[~pos] = rng.multivariate_normal(MEAN_NEG, COV_NEG, size=int((~pos).sum()))
    z = _sample_sensitive(rng, x, config.phi)
    return _finish(x, y, z)


def gen_nonlinear_synthetic(config: SynthConfig) -> Dataset:
    """Two-component Gaussian mixtures per class; not linearly separable.

    Each row picks its mixture component with a fair coin, so either class
    occupies two well-separated regions of the plane. The sensitive attribute
    is a Bernoulli draw of the rotated class posterior, as in the linear
    variant, but computed under the mixture densities of this variant so the
    attribute is biased along the actual (nonlinear) class structure.
    """
    if config.variant != "nonlinear":
        raise ValueError("config.variant must be 'nonlinear'")
    rng = np.random.default_rng(config.seed)
    y = np.where(rng.random(config.n) < 0.5, 1.0, -1.0)
    beta = rng.random(config.n) < 0.5
    x = np.empty((config.n, 2))
    for label, components in ((1.0, MIX_POS), (-1.0, MIX_NEG)):
        for use_first, (mean, cov) in ((True, components[0]), (False, components[1])):
            mask = (y == label) & (beta == use_first)
            if mask.any():
                x[mask] = rng.multivariate_normal(mean, cov, size=int(mask.sum()))
    z = _sample_sensitive_mixture(rng, x, config.phi)
    return _finish(x, y, z)


def generate(config: SynthConfig) -> Dataset:
    """Dispatch on ``config.variant``."""
    if config.variant == "linear":
        return gen_linear_synthetic(config)
    return gen_nonlinear_synthetic(config)
