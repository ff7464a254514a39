"""Partial transposition, negativity and the lossy single-photon Bell oracle."""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import DomainError
from .fock import TwoModeState

__all__ = [
    "PtReport",
    "partial_transpose",
    "pt_report",
    "pure_pt_report",
    "lossy_bell_state",
    "lossy_bell_pt_eigenvalues",
    "lossy_bell_sweep_csv",
]


def partial_transpose(rho, mode=2):
    """Transpose the indices of one mode; returns a ``TwoModeState``-shaped
    matrix (which need not be positive)."""
    t = rho.as_tensor()
    if mode == 2:
        t = t.transpose(0, 3, 2, 1)
    elif mode == 1:
        t = t.transpose(2, 1, 0, 3)
    else:
        raise DomainError(f"mode must be 1 or 2, got {mode!r}")
    d1, d2 = rho.dims
    return TwoModeState(t.reshape(d1 * d2, d1 * d2), rho.dims, rho.truncation_loss)


@dataclass(frozen=True)
class PtReport:
    """Spectrum summary of the partial transpose.

    NPT is sufficient evidence of entanglement; it is also necessary only
    when both modes are effectively qubits.
    """

    min_eigenvalue: float
    negativity: float
    log_negativity: float
    npt: bool

    def to_dict(self):
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "negativity": self.negativity,
            "log_negativity": self.log_negativity,
            "npt": self.npt,
        }


def pt_eigenvalues(rho):
    pt = partial_transpose(rho, 2).data
    return np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))


def pt_report(rho):
    eig = pt_eigenvalues(rho)
    negativity = float(-eig[eig < -TOL.pt_floor].sum())
    return PtReport(
        min_eigenvalue=float(eig[0]),
        negativity=negativity,
        log_negativity=float(math.log2(1.0 + 2.0 * negativity)),
        npt=bool(eig[0] < -TOL.pt),
    )


def pure_pt_report(psi):
    """:class:`PtReport` of the pure state with amplitude table
    ``psi[n1, n2]``, from its Schmidt coefficients ``p_i``: the partial
    transpose has eigenvalues ``p_i`` and ``+-sqrt(p_i p_j)`` for ``i < j``."""
    psi = np.asarray(psi, dtype=complex)
    schmidt = np.linalg.svd(psi / np.linalg.norm(psi), compute_uv=False)
    p = schmidt ** 2
    min_eig = -schmidt[0] * schmidt[1] if schmidt.size > 1 else 0.0
    offdiag = np.outer(schmidt, schmidt)[np.triu_indices(schmidt.size, 1)]
    negativity = float(offdiag[offdiag > TOL.pt_floor].sum())
    min_eig = float(min(min_eig, p[-1]))
    return PtReport(
        min_eigenvalue=min_eig,
        negativity=negativity,
        log_negativity=float(math.log2(1.0 + 2.0 * negativity)),
        npt=bool(min_eig < -TOL.pt),
    )


def lossy_bell_state(eta, dim=2):
    """``(1 - eta^2)|00><00| + eta^2 |psi+><psi+|`` with
    ``|psi+> = (|10> + |01>) / sqrt(2)``, embedded at cutoff ``dim``."""
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta={eta} must lie in [0, 1]")
    if dim < 2:
        raise DomainError("dim must be at least 2")
    t = np.zeros((dim, dim, dim, dim), complex)
    t[0, 0, 0, 0] = 1.0 - eta * eta
    half = 0.5 * eta * eta
    for a in ((1, 0), (0, 1)):
        for b in ((1, 0), (0, 1)):
            t[a[0], a[1], b[0], b[1]] = half
    return TwoModeState(t.reshape(dim * dim, dim * dim), (dim, dim))


def lossy_bell_pt_eigenvalues(eta):
    """Closed-form partial-transpose spectrum of :func:`lossy_bell_state`,
    sorted descending."""
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta={eta} must lie in [0, 1]")
    e2 = eta * eta
    root = math.sqrt(2.0 * e2 * e2 - 2.0 * e2 + 1.0)
    lam3 = 0.5 * ((1.0 - e2) + root)
    # (1 - e2 - root) / 2 rewritten to avoid cancellation at small eta
    lam4 = -0.5 * e2 * e2 / lam3 / 2.0 if lam3 > 0 else 0.0
    return tuple(sorted((0.5 * e2, 0.5 * e2, lam3, lam4), reverse=True))


def lossy_bell_sweep_csv(etas):
    """CSV ``eta,lam1,lam2,lam3,lam4,negativity`` from the closed form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["eta", "lam1", "lam2", "lam3", "lam4", "negativity"])
    for eta in etas:
        lam = lossy_bell_pt_eigenvalues(eta)
        neg = -sum(v for v in lam if v < -TOL.pt_floor)
        writer.writerow([repr(float(eta))] + [repr(v) for v in lam] + [repr(float(neg))])
    return buf.getvalue()
