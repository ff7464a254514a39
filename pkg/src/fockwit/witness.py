"""Finite-dimensional entanglement witnesses built from operator bases.

A basis ``{X_ij}`` of operators on ``C^n`` with ``X_ij^dag = X_ji`` and its
Hilbert-Schmidt dual ``{X'_ij}`` give the witness

    W = sum_ij g_ij X_ij (x) conj(X'_ij)

where ``conj`` is the entrywise complex conjugate. For the identity metric
this is ``sum_ij |i><j| (x) |i><j|`` in every basis, and on separable
states ``Tr[rho W]`` lies in ``[0, g_tilde]``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .errors import (
    DegenerateBasisError,
    DimensionMismatchError,
    DomainError,
    ImaginaryDefectError,
    InvalidSubsetError,
    NonpositiveMapError,
)
from .network import loss_kraus

__all__ = [
    "OperatorBasis",
    "DualBasis",
    "WitnessMetric",
    "FiniteWitness",
    "WitnessValue",
    "Expansion",
    "standard_basis",
    "pauli_basis",
    "random_basis",
    "dual_basis",
    "expand_in_basis",
    "build_witness",
    "evaluate_witness",
    "build_subset_witness",
    "transform_witness",
    "random_pure_state",
    "random_separable_state",
    "separable_samples",
]


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """``n^2`` operators stored as ``elements[i, j]`` (each ``n x n``)."""

    elements: np.ndarray

    def __post_init__(self):
        el = np.array(self.elements, dtype=complex)
        n = el.shape[0]
        if el.shape != (n, n, n, n):
            raise DimensionMismatchError(f"expected shape (n, n, n, n), got {el.shape}")
        defect = np.max(np.abs(el - el.transpose(1, 0, 3, 2).conj()))
        if defect > TOL.hermitian:
            raise DomainError(f"X_ij^dag != X_ji (defect {defect:.3g})")
        el.flags.writeable = False
        object.__setattr__(self, "elements", el)

    @property
    def dim(self):
        return self.elements.shape[0]

    def vectors(self):
        """Columns are the flattened operators, ordered by ``(i, j)``."""
        n = self.dim
        return self.elements.reshape(n * n, n * n).T

    def gram(self):
        v = self.vectors()
        return v.conj().T @ v


@dataclass(frozen=True, eq=False)
class DualBasis:
    elements: np.ndarray
    gram_condition: float

    @property
    def dim(self):
        return self.elements.shape[0]


def standard_basis(n):
    el = np.zeros((n, n, n, n), complex)
    for i in range(n):
        for j in range(n):
            el[i, j, i, j] = 1.0
    return OperatorBasis(el)


def pauli_basis():
    """Qubit basis ``X_00 = I``, ``X_11 = Z``, ``X_01 = X + iY``, ``X_10 = X - iY``.
    Orthogonal but not normalized."""
    eye = np.eye(2)
    z = np.diag([1.0, -1.0])
    raise_ = np.array([[0, 2], [0, 0]], complex)  # X + iY
    el = np.empty((2, 2, 2, 2), complex)
    el[0, 0], el[1, 1], el[0, 1], el[1, 0] = eye, z, raise_, raise_.conj().T
    return OperatorBasis(el)


def random_basis(n, rng, perturbation=0.1):
    """Oblique basis ``M E_ij M^dag + eps (R_ij + R_ji^dag)`` with random
    invertible ``M``; keeps the ``X_ij^dag = X_ji`` structure."""
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 2.0 * np.eye(n)
    rnd = rng.normal(size=(n, n, n, n)) + 1j * rng.normal(size=(n, n, n, n))
    el = np.einsum("ai,bj->ijab", m, m.conj())
    el = el + perturbation * (rnd + rnd.transpose(1, 0, 3, 2).conj())
    return OperatorBasis(el)


def dual_basis(basis):
    """Solve the Gram system for ``X'_ij`` with ``Tr[X'_ij^dag X_kl] = delta``.

    Uses the SVD of the matrix of flattened operators; the Gram condition
    number is the squared ratio of extreme singular values.
    """
    n = basis.dim
    v = basis.vectors()
    u, sing, wh = np.linalg.svd(v)
    cond = float((sing[0] / sing[-1]) ** 2) if sing[-1] > 0 else np.inf
    if not cond <= TOL.gram_condition:
        raise DegenerateBasisError(f"Gram condition number {cond:.3g} exceeds {TOL.gram_condition:g}")
    # V' = V G^{-1} = U S^{-1} W^dag
    dual = (u / sing) @ wh
    el = dual.T.reshape(n, n, n, n)
    return DualBasis(el, cond)


@dataclass(frozen=True, eq=False)
class Expansion:
    """``rho = sum coeffs[i,j] X_ij = sum dual_coeffs[i,j] X'_ij``."""

    coeffs: np.ndarray
    dual_coeffs: np.ndarray
    residual: float


def expand_in_basis(rho, basis, dual):
    data = rho.data if hasattr(rho, "data") else np.asarray(rho)
    coeffs = np.einsum("ijab,ab->ij", dual.elements.conj(), data)
    dual_coeffs = np.einsum("ijab,ab->ij", basis.elements.conj(), data)
    recon = np.einsum("ij,ijab->ab", coeffs, basis.elements)
    recon_dual = np.einsum("ij,ijab->ab", dual_coeffs, dual.elements)
    residual = float(max(np.abs(recon - data).max(), np.abs(recon_dual - data).max()))
    return Expansion(coeffs, dual_coeffs, residual)


@dataclass(frozen=True, eq=False)
class WitnessMetric:
    """Diagonal pseudo-metric weights ``g[i, j] > 0`` with ``g_tilde >= max g``.

    ``g`` must be symmetric for the witness to be Hermitian. The separable
    lower bound is guaranteed when ``g`` is also positive semidefinite as a
    matrix (the identity metric, all ones, is the canonical choice).
    """

    g: np.ndarray
    g_tilde: float = None

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatchError("metric weights must form a square table")
        if np.any(g <= 0):
            raise DomainError("metric weights must be positive")
        if np.max(np.abs(g - g.T)) > TOL.hermitian:
            raise DomainError("metric weights must satisfy g_ij = g_ji")
        g_tilde = float(g.max()) if self.g_tilde is None else float(self.g_tilde)
        if g.max() > g_tilde:
            raise DomainError("g_tilde must bound every metric weight")
        g.flags.writeable = False
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "g_tilde", g_tilde)

    @classmethod
    def identity(cls, n):
        return cls(np.ones((n, n)), 1.0)

    def scaled(self, factor):
        return WitnessMetric(self.g * factor, self.g_tilde * factor)


@dataclass(frozen=True, eq=False)
class FiniteWitness:
    """Witness matrix on ``C^n (x) C^n`` with separable range ``[0, g_tilde]``."""

    matrix: np.ndarray
    g_tilde: float
    dim: int
    label: str = field(default="witness", compare=False)

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def to_dict(self):
        flat = self.matrix.ravel()
        return {
            "dim": self.dim,
            "g_tilde": self.g_tilde,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc):
        n = int(doc["dim"])
        entries = np.array(doc["entries"], dtype=float)
        matrix = (entries[:, 0] + 1j * entries[:, 1]).reshape(n * n, n * n)
        return cls(matrix, float(doc["g_tilde"]), n)


def _assemble(basis_el, dual_el, weights, mask=None):
    n = basis_el.shape[0]
    w = weights if mask is None else weights * mask
    t = np.einsum("ij,ijab,ijcd->acbd", w, basis_el, dual_el.conj())
    return t.reshape(n * n, n * n)


def build_witness(basis, dual, metric=None):
    n = basis.dim
    if dual.dim != n:
        raise DimensionMismatchError("basis and dual dimensions differ")
    metric = metric or WitnessMetric.identity(n)
    if metric.g.shape != (n, n):
        raise DimensionMismatchError("metric table does not match the basis")
    return FiniteWitness(_assemble(basis.elements, dual.elements, metric.g), metric.g_tilde, n)


@dataclass(frozen=True)
class WitnessValue:
    value: float
    verdict: str

    def to_dict(self):
        return {"value": self.value, "verdict": self.verdict}


def evaluate_witness(w, rho):
    """``Tr[rho W]`` with verdict ``inside``, ``entangled_low`` or
    ``entangled_high`` relative to ``[0, g_tilde]``."""
    data = rho.data if hasattr(rho, "data") else np.asarray(rho)
    if data.shape != w.matrix.shape:
        raise DimensionMismatchError(f"state shape {data.shape} vs witness {w.matrix.shape}")
    raw = np.sum(data * w.matrix.T)
    if abs(raw.imag) > TOL.finite_witness * max(1.0, abs(raw)):
        raise ImaginaryDefectError(f"witness value has imaginary part {raw.imag:.3g}")
    value = float(raw.real)
    tol = TOL.finite_witness
    if value < -tol:
        verdict = "entangled_low"
    elif value > w.g_tilde + tol:
        verdict = "entangled_high"
    else:
        verdict = "inside"
    return WitnessValue(value, verdict)


def build_subset_witness(n, subset, metric=None, basis=None):
    """Witness from the basis elements indexed by ``subset`` only.

    ``subset`` is an iterable of ``(i, j)`` pairs closed under
    ``(i, j) -> (j, i)``. Only orthogonal bases are accepted, since the
    separable bound relies on the complementary elements being orthogonal.
    """
    basis = basis or standard_basis(n)
    if basis.dim != n:
        raise DimensionMismatchError("basis dimension does not match n")
    gram = basis.gram()
    if np.max(np.abs(gram - np.diag(np.diag(gram)))) > TOL.finite_witness:
        raise DomainError("subset witnesses require an orthogonal basis")
    pairs = {(int(i), int(j)) for i, j in subset}
    if not pairs:
        raise InvalidSubsetError("subset is empty")
    if any(not (0 <= i < n and 0 <= j < n) for i, j in pairs):
        raise InvalidSubsetError("subset index out of range")
    missing = [(j, i) for i, j in pairs if (j, i) not in pairs]
    if missing:
        raise InvalidSubsetError(f"subset not closed under transposition; missing {sorted(missing)}")
    mask = np.zeros((n, n))
    for i, j in pairs:
        mask[i, j] = 1.0
    metric = metric or WitnessMetric.identity(n)
    dual = dual_basis(basis)
    return FiniteWitness(
        _assemble(basis.elements, dual.elements, metric.g, mask), metric.g_tilde, n, "subset"
    )


def transform_witness(w, map_kind, kappa=None):
    """Apply a local positive map to the mode-2 factor of a witness.

    ``transpose_mode2`` transposes the second factor. ``attenuation`` applies
    the map sending ``|beta><beta|`` to ``|beta/kappa><beta/kappa|``, i.e. the
    loss channel with amplitude ``1/kappa``; it is positive only for
    ``kappa >= 1``. That map is not sub-unital, so the returned upper bound
    is ``g_tilde`` times the largest eigenvalue of its image of the identity;
    the lower bound 0 is unchanged.
    """
    n = w.dim
    t = w.matrix.reshape(n, n, n, n)
    if map_kind == "transpose_mode2":
        out = t.transpose(0, 3, 2, 1).reshape(n * n, n * n)
        return FiniteWitness(out, w.g_tilde, n, "transposed")
    if map_kind in ("attenuation", "attenuation_dilation"):
        if kappa is None or not kappa >= 1.0:
            raise NonpositiveMapError(f"attenuation needs kappa >= 1, got {kappa}")
        kraus = loss_kraus(1.0 / kappa, n)
        out = np.einsum("kai,jibl,kcl->jabc", kraus, t, kraus.conj()).reshape(n * n, n * n)
        image_of_identity = np.einsum("kab,kcb->ac", kraus, kraus.conj())
        scale = float(np.linalg.eigvalsh(image_of_identity)[-1])
        return FiniteWitness(out, w.g_tilde * max(1.0, scale), n, "attenuated")
    raise DomainError(f"unknown map kind {map_kind!r}")


# ---------------------------------------------------------------------------
# Random separable states

def random_pure_state(n, rng):
    """Haar-random vector in ``C^n``."""
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_separable_state(n, rng, max_terms=4):
    """``sum_k p_k |a_k><a_k| (x) |b_k><b_k|`` with Dirichlet weights and
    ``K <= max_terms`` Haar-random local pure states."""
    terms = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((n * n, n * n), complex)
    for p in weights:
        v = np.kron(random_pure_state(n, rng), random_pure_state(n, rng))
        rho += p * np.outer(v, v.conj())
    return rho


def separable_samples(n, count, seed=0, max_terms=4):
    """Deterministic list of ``count`` random separable states; sample ``k``
    uses its own child seed so results do not depend on evaluation order."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [random_separable_state(n, np.random.default_rng(c), max_terms) for c in children]
