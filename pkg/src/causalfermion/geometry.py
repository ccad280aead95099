"""Spin-space projections and projected spacetime plots for spin dimension one.

For a reference point ``x`` with non-trivial eigenvalues ``(1 +/- tau) / 2`` the
compression of another point ``y`` to the image of ``x`` is written, in the
eigenbasis of ``x`` (positive eigenvalue first), as

    pi_x y pi_x = (y0 + y1 s1 + y2 s2 + y3 s3) / 2 .

``y`` is spacelike to ``x`` iff ``(tau^2 - 1)(y1^2 + y2^2) > (y3 + y0 tau)^2``.
In the plot coordinates ``yh0 = y3 + y0 tau`` and ``yh_{1,2} = sqrt(tau^2 - 1) y_{1,2}``
this reads ``yh0^2 < yh1^2 + yh2^2``, a Minkowski light cone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .action import ZERO_TOL
from .errors import DegenerateImage, NotSpinOne
from .operators import CausalClass, Configuration, OperatorPoint

CONE_RTOL = 1e-9
SINGULAR_TOL = 1e-12
DEFAULT_EXPONENT = 1.5
PLOT_COLUMNS = ("index", "hat_y0", "hat_r", "class", "weight", "is_reference", "singular")


@dataclass(frozen=True)
class SpinProjection:
    y0: float
    y1: float
    y2: float
    y3: float
    ref_tau: float

    @property
    def vector_norm(self) -> float:
        return float(np.sqrt(self.y1**2 + self.y2**2 + self.y3**2))

    def eigenvalues(self) -> tuple[float, float]:
        """Eigenvalues ``(y0 -/+ |y|) / 2`` of the projected operator."""
        r = self.vector_norm
        return 0.5 * (self.y0 - r), 0.5 * (self.y0 + r)

    def hat(self) -> tuple[float, float, float]:
        s = np.sqrt(max(self.ref_tau**2 - 1.0, 0.0))
        return self.y3 + self.y0 * self.ref_tau, s * self.y1, s * self.y2


@dataclass(frozen=True)
class PlotRow:
    point_index: int
    hat_y0: float
    hat_r: float
    causal_class: CausalClass
    weight: float
    rescaled: bool
    is_reference: bool = False
    singular: bool = False


def spin_projection(x: OperatorPoint, y: OperatorPoint) -> SpinProjection:
    """Coordinates of ``pi_x y pi_x`` in the eigenbasis of ``x``."""
    if x.n != 1 or y.n != 1:
        raise NotSpinOne("spin projections are defined for n = 1")
    if x.f != y.f:
        raise ValueError("points live in different dimensions")
    evals = x.eigenvalues
    scale = max(1.0, float(np.max(np.abs(evals))))
    if x.f > 1 and evals[-1] - evals[-2] <= 1e-12 * scale:
        raise DegenerateImage("largest eigenvalue of the reference point is not isolated")
    e_plus = x.eigenvectors[:, -1]
    e_minus = x.eigenvectors[:, 0]
    basis = np.stack([e_plus, e_minus], axis=1)
    b = basis.conj().T @ y.matrix @ basis
    return SpinProjection(
        y0=float((b[0, 0] + b[1, 1]).real),
        y1=float(2.0 * b[1, 0].real),
        y2=float(2.0 * b[1, 0].imag),
        y3=float((b[0, 0] - b[1, 1]).real),
        ref_tau=float(evals[-1] - evals[0]),
    )


def cone_classify(proj: SpinProjection) -> CausalClass:
    """Causal relation of ``y`` to the reference point from its projection."""
    tau = proj.ref_tau
    lhs = (tau * tau - 1.0) * (proj.y1**2 + proj.y2**2)
    rhs = (proj.y3 + proj.y0 * tau) ** 2
    # the product eigenvalues are (y0 + y3 tau +/- sqrt(rhs - lhs)) / 4
    scale = max(lhs, rhs, (proj.y0 + proj.y3 * tau) ** 2)
    if scale <= ZERO_TOL**2:
        # vanishing product: all eigenvalues zero, spacelike by the spectral rule
        return CausalClass.SPACELIKE
    if abs(rhs - lhs) <= CONE_RTOL * scale:
        return CausalClass.LIGHTLIKE
    return CausalClass.SPACELIKE if lhs > rhs else CausalClass.TIMELIKE


def plot_rows(
    config: Configuration,
    ref_index: int,
    rescale: bool = False,
    exponent: float = DEFAULT_EXPONENT,
) -> list[PlotRow]:
    """One row per point, relative to the reference point ``ref_index``.

    With ``rescale`` all components are divided by ``|yh0|^exponent``; rows with
    ``|yh0| < 1e-12`` then carry ``singular=True`` and NaN coordinates.
    """
    if config.n != 1:
        raise NotSpinOne(f"projected plots need n = 1, got n = {config.n}")
    if not 0 <= ref_index < config.m:
        raise IndexError(f"reference index {ref_index} out of range for m = {config.m}")
    ref = config.points[ref_index]
    rows = []
    for i, p in enumerate(config.points):
        proj = spin_projection(ref, p)
        h0, h1, h2 = proj.hat()
        r = float(np.hypot(h1, h2))
        singular = False
        if rescale:
            if abs(h0) < SINGULAR_TOL:
                singular = True
                h0, r = np.nan, np.nan
            else:
                d = abs(h0) ** exponent
                h0, r = h0 / d, r / d
        rows.append(
            PlotRow(
                point_index=i,
                hat_y0=float(h0),
                hat_r=r,
                causal_class=cone_classify(proj),
                weight=float(config.weights[i]),
                rescaled=bool(rescale),
                is_reference=i == ref_index,
                singular=singular,
            )
        )
    return rows


def write_plot_file(rows, path) -> None:
    """Tab-separated plot data with a header line; columns are ``PLOT_COLUMNS``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(PLOT_COLUMNS)
        for r in rows:
            w.writerow(
                [
                    r.point_index,
                    repr(r.hat_y0),
                    repr(r.hat_r),
                    r.causal_class.value,
                    repr(r.weight),
                    int(r.is_reference),
                    int(r.singular),
                ]
            )


def read_plot_file(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))
