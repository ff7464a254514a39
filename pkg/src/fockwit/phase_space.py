"""s-parametrized characteristic functions, quasiprobabilities and grid scans."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .config import SCAN_POINTS, SCAN_RADIUS, TOL
from .errors import DomainError, ImaginaryDefectError, UnsupportedOrderingError
from .fock import DensityMatrix, ordered_block, ordered_trace, reduced_state

__all__ = [
    "SParam",
    "PhaseGrid",
    "QpdScan",
    "char_fn",
    "wigner_operator",
    "qpd",
    "scan_qpd",
    "marginal_qpd_scan",
]


@dataclass(frozen=True)
class SParam:
    """Ordering parameter: -1 anti-normal (Q), 0 symmetric (Wigner), +1 normal (P)."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not -1.0 <= s <= 1.0:
            raise DomainError(f"ordering parameter s={s} outside [-1, 1]")
        object.__setattr__(self, "s", s)

    def __float__(self):
        return self.s


def _s(value):
    return value.s if isinstance(value, SParam) else SParam(value).s


@dataclass(frozen=True)
class PhaseGrid:
    """Square lattice over ``[-radius, radius]^2`` in (Re alpha, Im alpha).

    ``points`` must be odd so the origin is a sample. Arrays are indexed
    ``[i, j]`` with ``Re = axis[i]`` and ``Im = axis[j]``, so row-major order
    runs over Im fastest.
    """

    radius: float = SCAN_RADIUS
    points: int = SCAN_POINTS

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("grid radius must be positive")
        if int(self.points) != self.points or self.points < 3 or self.points % 2 == 0:
            raise DomainError("points per axis must be an odd integer >= 3")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "points", int(self.points))

    @property
    def spacing(self):
        return 2.0 * self.radius / (self.points - 1)

    @property
    def axis(self):
        return np.linspace(-self.radius, self.radius, self.points)

    @property
    def weight(self):
        """Area element of one sample."""
        return self.spacing ** 2

    def alphas(self):
        re, im = np.meshgrid(self.axis, self.axis, indexing="ij")
        return re + 1j * im

    def boundary_mask(self):
        mask = np.zeros((self.points, self.points), bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    def to_dict(self):
        return {"radius": self.radius, "points": self.points}


def _data(rho):
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _displacement_params(alpha, s):
    alpha = np.asarray(alpha, dtype=complex)
    pref = np.exp((s - 1.0) * 0.5 * np.abs(alpha) ** 2)
    return pref, alpha, -alpha.conj()


def char_fn(rho, alpha, s=0.0):
    """``chi(alpha, s) = Tr[rho D(alpha, s)]``; ``alpha`` may be an array."""
    s = _s(s)
    pref, x, y = _displacement_params(alpha, s)
    out = ordered_trace(_data(rho), pref, x, y, 1.0)
    return out if out.ndim else complex(out)


def _wigner_params(beta, s):
    if s > TOL.s_max:
        raise UnsupportedOrderingError(f"s={s} exceeds s_max={TOL.s_max}")
    beta = np.asarray(beta, dtype=complex)
    c = 2.0 / (1.0 - s)
    pref = c * np.exp(-c * np.abs(beta) ** 2)
    q = (s + 1.0) / (s - 1.0)
    return pref, c * beta, c * beta.conj(), q


def wigner_operator(beta, s, dim):
    """``T(beta, s)`` with ``Tr[rho T] = pi W(beta, s)``.

    Equals ``2/(1-s) D(beta) q^N D(beta)^dag`` with ``q = (s+1)/(s-1)``;
    elements come from the exact normal-ordered expansion.
    """
    s = _s(s)
    pref, x, y, q = _wigner_params(beta, s)
    return ordered_block(pref, x, y, q, int(dim))


def _real(values, scale):
    values = np.asarray(values)
    defect = np.max(np.abs(values.imag), initial=0.0)
    if defect > TOL.qpd_imag * max(1.0, scale):
        raise ImaginaryDefectError(f"imaginary part {defect:.3g} exceeds tolerance")
    return values.real


def qpd(rho, beta, s=0.0):
    """``W(beta, s) = Tr[rho T(beta, s)] / pi``; ``beta`` may be an array."""
    s = _s(s)
    pref, x, y, q = _wigner_params(beta, s)
    raw = ordered_trace(_data(rho), pref, x, y, q) / np.pi
    out = _real(raw, float(np.max(np.abs(raw), initial=0.0)))
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class QpdScan:
    s: float
    grid: PhaseGrid
    values: np.ndarray = field(repr=False)
    min_value: float
    argmin: complex
    origin_value: float

    def to_dict(self):
        return {
            "s": self.s,
            "grid": self.grid.to_dict(),
            "min_value": self.min_value,
            "argmin": [self.argmin.real, self.argmin.imag],
            "origin_value": self.origin_value,
        }

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "value"])
        alphas = self.grid.alphas()
        for a, v in zip(alphas.ravel(), self.values.ravel()):
            writer.writerow([repr(float(a.real)), repr(float(a.imag)), repr(float(v))])
        return buf.getvalue()


def scan_qpd(rho, s=0.0, grid=None):
    """Evaluate ``W(., s)`` on every grid sample.

    ``argmin`` is the first minimizing sample in row-major order; the
    origin value is reported separately.
    """
    s = _s(s)
    grid = grid or PhaseGrid()
    alphas = grid.alphas()
    values = qpd(rho, alphas, s)
    flat = int(np.argmin(values))
    centre = grid.points // 2
    return QpdScan(
        s=s,
        grid=grid,
        values=values,
        min_value=float(values.ravel()[flat]),
        argmin=complex(alphas.ravel()[flat]),
        origin_value=float(values[centre, centre]),
    )


def marginal_qpd_scan(rho, mode, s=0.0, grid=None):
    """Scan the reduced state of ``mode`` of a two-mode state."""
    return scan_qpd(reduced_state(rho, mode), s, grid)
