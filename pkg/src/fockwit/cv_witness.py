"""Displacement-operator witnesses for beam-splitter outputs and the
marginal-negativity entanglement criterion.

For a splitter ``(t, r)`` with ``t >= r`` and ``k = t / r`` the witness on
the output pairs a normally ordered displacement on one mode with an
anti-normally ordered one, scaled by ``k``, on the other. Its expectation
collapses to a single-mode quasiprobability of the *input*:

    k^2 int d^2a/pi Tr[rho_out D_1(a, 1) D_2(k a, -1)] = pi t^2 W_in^(2)(0, 1 - 2t^2)

The target mode and the ``t < r`` case follow by swapping roles. Evaluation
is a direct grid quadrature of the two-mode characteristic function.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import QUADRATURE_POINTS, QUADRATURE_RADIUS, SCAN_POINTS, SCAN_RADIUS, TOL, TWO_MODE_DIM
from .entanglement import pt_report, pure_pt_report
from .errors import DimensionMismatchError, DomainError, GridTooSmallError, ImaginaryDefectError
from .fock import (
    DensityMatrix,
    TwoModeState,
    is_pure_spec,
    make_amplitudes,
    natural_cutoff,
    ordered_block,
    product_state,
    reduced_state,
)
from .network import BeamSplitter, apply_bs, apply_bs_amplitudes
from .phase_space import PhaseGrid, qpd, scan_qpd

__all__ = [
    "CvWitnessSpec",
    "CriterionVerdict",
    "IdentityCheck",
    "criterion_s",
    "two_mode_char_fn",
    "cv_witness_expectation",
    "check_witness_identity",
    "criterion_check",
    "detection_check",
    "ProductRun",
    "product_criterion",
]

_CHUNK = 2048


def criterion_s(bs):
    """Ordering at which input marginals decide output entanglement: ``-|2t^2 - 1|``."""
    return -abs(2.0 * bs.t * bs.t - 1.0)


@dataclass(frozen=True)
class CvWitnessSpec:
    """Displacement witness aimed at input mode ``target_mode`` of a
    ``(t, r)`` splitter, displaced to phase-space point ``beta``."""

    t: float
    r: float
    target_mode: int = 2
    beta: complex = 0j
    grid: PhaseGrid = field(default_factory=lambda: PhaseGrid(QUADRATURE_RADIUS, QUADRATURE_POINTS))

    def __post_init__(self):
        BeamSplitter(self.t, self.r)
        if self.target_mode not in (1, 2):
            raise DomainError("target_mode must be 1 or 2")
        if min(self.t, self.r) == 0.0:
            raise DomainError("the displacement witness needs t > 0 and r > 0")
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def for_splitter(cls, bs, target_mode=2, beta=0j, grid=None):
        grid = grid or PhaseGrid(QUADRATURE_RADIUS, QUADRATURE_POINTS)
        return cls(bs.t, bs.r, target_mode, beta, grid)

    @property
    def transmissive(self):
        """True for the ``t >= r`` branch (boundary ``t = r`` included)."""
        return self.t >= self.r

    @property
    def scale(self):
        return self.t / self.r if self.transmissive else self.r / self.t

    @property
    def ordering(self):
        """Ordering of the input quasiprobability the witness reproduces."""
        amp = self.t if self.transmissive else self.r
        return 1.0 - 2.0 * amp * amp

    @property
    def prefactor(self):
        amp = self.t if self.transmissive else self.r
        return math.pi * amp * amp

    def arguments(self, alpha):
        """Output displacement arguments ``(alpha1, alpha2)``, which mode
        carries the anti-normal (scaled) factor, and the input-side argument
        ``gamma`` of the target mode."""
        k = self.scale
        if self.transmissive:
            if self.target_mode == 2:
                return alpha, k * alpha, 2, alpha / self.r
            return k * alpha, -alpha, 1, alpha / self.r
        if self.target_mode == 1:
            return alpha, -k * alpha, 2, alpha / self.t
        return -k * alpha, -alpha, 1, -alpha / self.t


def _displacement_stack(alpha, s, dim):
    alpha = np.asarray(alpha, dtype=complex)
    pref = np.exp(0.5 * (s - 1.0) * np.abs(alpha) ** 2)
    return ordered_block(pref, alpha, -alpha.conj(), 1.0, dim)


def two_mode_char_fn(rho, alpha1, alpha2, s1=0.0, s2=0.0):
    """``Tr[rho D_1(alpha1, s1) (x) D_2(alpha2, s2)]`` for arrays of points.

    Computed in chunks as one matrix product per chunk:
    ``sum rho[a, b, c, d] D1[c, a] D2[d, b]``.
    """
    if not isinstance(rho, TwoModeState):
        raise DimensionMismatchError("two_mode_char_fn expects a TwoModeState")
    a1, a2 = np.broadcast_arrays(np.asarray(alpha1, complex), np.asarray(alpha2, complex))
    shape = a1.shape
    a1, a2 = a1.ravel(), a2.ravel()
    d1, d2 = rho.dims
    # R[(a, c), (b, d)] = rho[a, b, c, d]
    r = rho.as_tensor().transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)
    out = np.empty(a1.size, complex)
    for lo in range(0, a1.size, _CHUNK):
        hi = min(lo + _CHUNK, a1.size)
        m1 = _displacement_stack(a1[lo:hi], s1, d1)  # [k, c, a]
        m2 = _displacement_stack(a2[lo:hi], s2, d2)  # [k, d, b]
        v2 = m2.transpose(0, 2, 1).reshape(hi - lo, d2 * d2)  # [k, (b, d)]
        v1 = m1.transpose(0, 2, 1).reshape(hi - lo, d1 * d1)  # [k, (a, c)]
        out[lo:hi] = np.einsum("kx,kx->k", v1, v2 @ r.T)
    return out.reshape(shape)


def cv_witness_expectation(rho_out, spec):
    """Grid quadrature of the witness expectation on an output state.

    Raises :class:`GridTooSmallError` when the integrand has not decayed
    below the configured level on the grid boundary.
    """
    grid = spec.grid
    alpha = grid.alphas()
    a1, a2, scaled_mode, gamma = spec.arguments(alpha)
    s1, s2 = (-1.0, 1.0) if scaled_mode == 1 else (1.0, -1.0)
    integrand = two_mode_char_fn(rho_out, a1, a2, s1, s2) * spec.scale ** 2
    if spec.beta != 0:
        b = spec.beta
        integrand = integrand * np.exp(b * gamma.conj() - b.conjugate() * gamma)
    edge = float(np.max(np.abs(integrand[grid.boundary_mask()])))
    if edge > TOL.grid_decay:
        raise GridTooSmallError(
            f"witness integrand is {edge:.3g} on the boundary of radius {grid.radius}"
        )
    total = np.sum(integrand) * grid.weight / math.pi
    if abs(total.imag) > TOL.witness_imag * max(1.0, abs(total)):
        raise ImaginaryDefectError(f"witness expectation has imaginary part {total.imag:.3g}")
    return float(total.real)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    defect: float

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "defect": self.defect}


def check_witness_identity(rho_in, bs, target_mode=2, beta=0j, grid=None):
    """Compare the output-side witness quadrature with the input-side
    prediction ``pi max(t, r)^2 W_in(beta, s)``."""
    spec = CvWitnessSpec.for_splitter(bs, target_mode, beta, grid)
    lhs = cv_witness_expectation(apply_bs(rho_in, bs), spec)
    marginal = reduced_state(rho_in, target_mode)
    rhs = spec.prefactor * qpd(marginal, spec.beta, spec.ordering)
    return IdentityCheck(lhs, float(rhs), abs(lhs - float(rhs)))


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of the marginal-negativity test.

    ``entangled_sufficient`` certifies entanglement; its absence proves
    nothing. ``pt_cross_check`` is the smallest partial-transpose
    eigenvalue of the state whose entanglement is being asserted.
    """

    s_star: float
    min_marginal: float
    argmin: complex
    entangled_sufficient: bool
    pt_cross_check: float
    mode_minima: tuple = field(default=(), compare=False)
    origin_values: tuple = field(default=(), compare=False)

    def to_dict(self):
        return {
            "s_star": self.s_star,
            "min_marginal": self.min_marginal,
            "argmin": [self.argmin.real, self.argmin.imag],
            "entangled_sufficient": self.entangled_sufficient,
            "pt_cross_check": self.pt_cross_check,
        }


def _verdict(scanned, target, bs, grid, marginals=None, pt=None):
    s_star = criterion_s(bs)
    if marginals is None:
        marginals = [reduced_state(scanned, mode) for mode in (1, 2)]
    scans = [scan_qpd(m, s_star, grid) for m in marginals]
    if pt is None:
        pt = pt_report(target)
    best = min(scans, key=lambda sc: sc.min_value)
    return CriterionVerdict(
        s_star=s_star,
        min_marginal=best.min_value,
        argmin=best.argmin,
        entangled_sufficient=bool(best.min_value < -TOL.nonclassical),
        pt_cross_check=pt.min_eigenvalue,
        mode_minima=tuple(sc.min_value for sc in scans),
        origin_values=tuple(sc.origin_value for sc in scans),
    )


def criterion_check(rho_in, bs, grid=None):
    """Scan both input marginals at ``criterion_s(bs)``; negativity in either
    certifies entanglement of ``apply_bs(rho_in, bs)``."""
    grid = grid or PhaseGrid(SCAN_RADIUS, SCAN_POINTS)
    return _verdict(rho_in, apply_bs(rho_in, bs), bs, grid)


def detection_check(rho, bs, grid=None):
    """Certify entanglement of ``rho`` itself: pass it backwards through the
    splitter and scan the marginals of ``U^dag rho U`` at ``criterion_s(bs)``."""
    grid = grid or PhaseGrid(SCAN_RADIUS, SCAN_POINTS)
    return _verdict(apply_bs(rho, bs, inverse=True), rho, bs, grid)


@dataclass(frozen=True)
class ProductRun:
    """Criterion verdict for a product input plus the output's PT summary.

    ``path`` is ``"pure"`` when both inputs were pure and propagated as
    amplitudes, else ``"mixed"``; ``dims`` are the per-mode cutoffs used.
    """

    verdict: CriterionVerdict
    pt: object
    dims: tuple
    path: str


def product_criterion(spec1, spec2, bs, *, dim=None, grid=None, strict=False,
                      pure_tail=1e-20, pure_cap=64):
    """Run :func:`criterion_check` on ``spec1 (x) spec2``.

    Pure inputs skip density matrices: their cutoffs are chosen so the
    discarded weight is below ``pure_tail`` (finite-support truncation makes
    any state slightly non-Gaussian, which would otherwise show up as spurious
    negativity and entanglement), and the output PT spectrum follows from
    its Schmidt decomposition. Mixed inputs use :func:`product_state` at
    ``dim`` per mode.
    """
    grid = grid or PhaseGrid(SCAN_RADIUS, SCAN_POINTS)
    if is_pure_spec(spec1) and is_pure_spec(spec2):
        d1 = natural_cutoff(spec1, pure_tail, pure_cap)
        d2 = natural_cutoff(spec2, pure_tail, pure_cap)
        v1, _ = make_amplitudes(spec1, d1, strict=strict)
        v2, _ = make_amplitudes(spec2, d2, strict=strict)
        big = d1 + d2 - 1
        psi = np.zeros((big, big), complex)
        psi[:d1, :d2] = np.outer(v1, v2)
        pt = pure_pt_report(apply_bs_amplitudes(psi, bs))
        marginals = [DensityMatrix(np.outer(v, v.conj())) for v in (v1, v2)]
        verdict = _verdict(None, None, bs, grid, marginals, pt)
        return ProductRun(verdict, pt, (big, big), "pure")
    dim = dim or TWO_MODE_DIM
    rho = product_state(spec1, spec2, dim, strict=strict)
    out = apply_bs(rho, bs)
    pt = pt_report(out)
    verdict = _verdict(rho, out, bs, grid, pt=pt)
    return ProductRun(verdict, pt, rho.dims, "mixed")
