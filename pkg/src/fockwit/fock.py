"""Truncated Fock-space states and the operator primitives built on them.

Single-mode states live on levels ``0 .. dim-1``. Two-mode states use the
row index convention ``i1 * dim2 + i2``.
"""

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .config import TOL, TWO_MODE_DIM
from .errors import (
    DimensionMismatchError,
    DomainError,
    SpecParseError,
    TruncationError,
    TruncationWarning,
)

__all__ = [
    "DensityMatrix",
    "TwoModeState",
    "StateSpec",
    "Diagnostics",
    "parse_spec",
    "make_state",
    "natural_cutoff",
    "is_pure_spec",
    "make_amplitudes",
    "product_state",
    "annihilation",
    "displacement_matrix",
    "s_ordered_displacement",
    "squeeze_matrix",
    "tensor",
    "partial_trace",
    "reduced_state",
    "embed",
    "swap_modes",
    "validate",
    "ordered_block",
    "ordered_trace",
]


def _frozen(array):
    arr = np.array(array, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Single-mode density matrix in the truncated Fock basis.

    ``truncation_loss`` records the probability weight a constructor had
    to discard (and renormalize away) to fit the state below the cutoff.
    """

    data: np.ndarray
    truncation_loss: float = 0.0

    def __post_init__(self):
        arr = _frozen(self.data)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def dim(self):
        return self.data.shape[0]

    def trace(self):
        return float(np.real(np.trace(self.data)))

    def purity(self):
        return float(np.real(np.vdot(self.data, self.data)))

    def populations(self):
        return np.real(np.diag(self.data)).copy()


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Bipartite state on two truncated Fock spaces."""

    data: np.ndarray
    dims: tuple
    truncation_loss: float = 0.0

    def __post_init__(self):
        arr = _frozen(self.data)
        d1, d2 = (int(d) for d in self.dims)
        if arr.shape != (d1 * d2, d1 * d2):
            raise DimensionMismatchError(
                f"matrix shape {arr.shape} does not match dims ({d1}, {d2})"
            )
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dims", (d1, d2))

    @property
    def dim1(self):
        return self.dims[0]

    @property
    def dim2(self):
        return self.dims[1]

    def as_tensor(self):
        """View with indices ``[i1, i2, j1, j2]``."""
        d1, d2 = self.dims
        return self.data.reshape(d1, d2, d1, d2)

    def trace(self):
        return float(np.real(np.trace(self.data)))


# ---------------------------------------------------------------------------
# State specification grammar

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_KIND = re.compile(r"[a-z]+")
_ARITY = {"fock": 1, "coherent": 2, "thermal": 1, "squeezed": 2}


@dataclass(frozen=True)
class StateSpec:
    """Parsed form of a state specification string.

    ``params`` holds the numeric parameters of a simple spec; ``components``
    holds ``(weight, StateSpec)`` pairs for a ``mix``.
    """

    kind: str
    params: tuple = ()
    components: tuple = ()
    text: str = field(default="", compare=False)

    def __str__(self):
        return self.text or _format_spec(self)


def _format_spec(spec):
    if spec.kind == "mix":
        return "mix:" + "+".join(f"{w!r}*{_format_spec(c)}" for w, c in spec.components)
    return spec.kind + ":" + ",".join(repr(p) for p in spec.params)


def _parse_simple(text, pos):
    m = _KIND.match(text, pos)
    if not m:
        raise SpecParseError("expected a lowercase state kind", text, pos)
    kind = m.group(0)
    if kind not in _ARITY:
        raise SpecParseError(f"unknown state kind {kind!r}", text, pos)
    pos = m.end()
    if pos >= len(text) or text[pos] != ":":
        raise SpecParseError("expected ':'", text, pos)
    pos += 1
    params = []
    while True:
        m = _NUMBER.match(text, pos)
        if not m:
            raise SpecParseError("expected a decimal number", text, pos)
        params.append(float(m.group(0)))
        pos = m.end()
        if pos < len(text) and text[pos] == ",":
            pos += 1
            continue
        break
    if len(params) != _ARITY[kind]:
        raise SpecParseError(
            f"{kind} takes {_ARITY[kind]} parameter(s), got {len(params)}", text, m.start()
        )
    if kind == "fock":
        if params[0] != int(params[0]) or params[0] < 0:
            raise SpecParseError("fock level must be a non-negative integer", text, m.start())
        params[0] = int(params[0])
    if kind == "thermal" and params[0] < 0:
        raise SpecParseError("thermal occupation must be >= 0", text, m.start())
    if kind == "squeezed" and params[0] < 0:
        raise SpecParseError("squeezing magnitude must be >= 0", text, m.start())
    return StateSpec(kind, tuple(params)), pos


def parse_spec(text):
    """Parse ``fock:n``, ``coherent:re,im``, ``thermal:nbar``,
    ``squeezed:r,phi`` or ``mix:p1*spec1+p2*spec2+...``."""
    if isinstance(text, StateSpec):
        return text
    if not isinstance(text, str) or not text:
        raise SpecParseError("empty specification", str(text), 0)
    if text.startswith("mix:"):
        pos = 4
        components = []
        while True:
            m = _NUMBER.match(text, pos)
            if not m:
                raise SpecParseError("expected a mixture weight", text, pos)
            weight = float(m.group(0))
            if weight <= 0:
                raise SpecParseError("mixture weights must be positive", text, pos)
            pos = m.end()
            if pos >= len(text) or text[pos] != "*":
                raise SpecParseError("expected '*'", text, pos)
            component, pos = _parse_simple(text, pos + 1)
            components.append((weight, component))
            if pos == len(text):
                break
            if text[pos] != "+":
                raise SpecParseError("expected '+' or end of input", text, pos)
            pos += 1
        total = sum(w for w, _ in components)
        if abs(total - 1.0) > TOL.mixture_weights:
            raise SpecParseError(f"mixture weights sum to {total}, not 1", text, 4)
        return StateSpec("mix", (), tuple(components), text)
    spec, pos = _parse_simple(text, 0)
    if pos != len(text):
        raise SpecParseError("unexpected trailing characters", text, pos)
    return StateSpec(spec.kind, spec.params, (), text)


# ---------------------------------------------------------------------------
# Closed-form Fock amplitudes and populations

def _coherent_amplitudes(alpha, dim):
    n = np.arange(dim)
    log_mag = -0.5 * abs(alpha) ** 2 - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        amps = np.zeros(dim, complex)
        amps[0] = 1.0
        return amps
    return np.exp(log_mag + n * np.log(abs(alpha))) * np.exp(1j * n * np.angle(alpha))


def _thermal_populations(nbar, dim):
    if nbar == 0:
        p = np.zeros(dim)
        p[0] = 1.0
        return p
    ratio = nbar / (nbar + 1.0)
    return ratio ** np.arange(dim) / (nbar + 1.0)


def _squeezed_amplitudes(r, phi, dim):
    amps = np.zeros(dim, complex)
    amps[0] = 1.0 / math.sqrt(math.cosh(r))
    factor = -np.exp(1j * phi) * math.tanh(r)
    for k in range(2, dim, 2):
        # c_{2n} / c_{2n-2} = factor * sqrt((2n)(2n-1)) / (2n)
        amps[k] = amps[k - 2] * factor * math.sqrt((k - 1) / k)
    return amps


def _truncation_guard(message, strict):
    if strict:
        raise TruncationError(message)
    warnings.warn(message, TruncationWarning, stacklevel=3)


def make_state(spec, dim, *, strict=False):
    """Build the density matrix named by ``spec`` on ``dim`` Fock levels.

    Truncated distributions are renormalized; the discarded weight is kept
    in ``truncation_loss``. Truncation guards warn by default and raise
    :class:`TruncationError` when ``strict`` is set.
    """
    spec = parse_spec(spec)
    dim = int(dim)
    if dim < 2:
        raise DomainError("dim must be at least 2")
    if spec.kind == "mix":
        data = np.zeros((dim, dim), complex)
        loss = 0.0
        for weight, component in spec.components:
            part = make_state(component, dim, strict=strict)
            data += weight * part.data
            loss += weight * part.truncation_loss
        return DensityMatrix(data, loss)

    if spec.kind == "fock":
        (n,) = spec.params
        if n >= dim:
            raise TruncationError(f"fock:{n} does not fit below cutoff {dim}")
        data = np.zeros((dim, dim), complex)
        data[n, n] = 1.0
        return DensityMatrix(data)

    if spec.kind == "thermal":
        (nbar,) = spec.params
        p = _thermal_populations(nbar, dim)
        loss = max(0.0, 1.0 - p.sum())
        if loss > TOL.truncation_tail:
            _truncation_guard(f"thermal:{nbar} loses weight {loss:.3g} at cutoff {dim}", strict)
        return DensityMatrix(np.diag(p / p.sum()).astype(complex), loss)

    if spec.kind == "coherent":
        alpha = complex(*spec.params)
        if abs(alpha) ** 2 > dim / 4:
            _truncation_guard(f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds dim/4 at cutoff {dim}", strict)
        amps = _coherent_amplitudes(alpha, dim)
    else:
        r, phi = spec.params
        amps = _squeezed_amplitudes(r, phi, dim)
    norm = float(np.vdot(amps, amps).real)
    loss = max(0.0, 1.0 - norm)
    if spec.kind == "squeezed" and loss > TOL.truncation_tail:
        _truncation_guard(f"squeezed state loses weight {loss:.3g} at cutoff {dim}", strict)
    amps = amps / math.sqrt(norm)
    return DensityMatrix(np.outer(amps, amps.conj()), loss)


def _tail_weights(spec, cap):
    """``out[d]`` is the weight on levels ``>= d`` for ``d = 0 .. cap``."""
    spec = parse_spec(spec)
    if spec.kind == "mix":
        return sum(p * _tail_weights(c, cap) for p, c in spec.components)
    if spec.kind == "fock":
        weights = np.zeros(max(cap, spec.params[0] + 1))
        weights[spec.params[0]] = 1.0
        weights = weights[:cap]
    elif spec.kind == "thermal":
        weights = _thermal_populations(spec.params[0], cap)
    elif spec.kind == "coherent":
        weights = np.abs(_coherent_amplitudes(complex(*spec.params), cap)) ** 2
    else:
        weights = np.abs(_squeezed_amplitudes(spec.params[0], spec.params[1], cap)) ** 2
    # summed from the small end for accuracy
    return np.append(np.cumsum(weights[::-1])[::-1], 0.0)


def natural_cutoff(spec, tail=1e-10, cap=200):
    """Smallest cutoff (at least 2, at most ``cap``) whose discarded weight
    is below ``tail``."""
    spec = parse_spec(spec)
    if spec.kind == "mix":
        return max(natural_cutoff(c, tail, cap) for _, c in spec.components)
    if spec.kind == "fock":
        return max(2, spec.params[0] + 1)
    remaining = _tail_weights(spec, cap)
    hits = np.nonzero(remaining < tail)[0]
    return int(max(2, hits[0] if hits.size else cap))


def is_pure_spec(spec):
    return parse_spec(spec).kind in ("fock", "coherent", "squeezed")


def make_amplitudes(spec, dim, *, strict=False):
    """Normalized Fock amplitudes of a pure spec (``fock``, ``coherent`` or
    ``squeezed``) together with the discarded weight."""
    spec = parse_spec(spec)
    if not is_pure_spec(spec):
        raise DomainError(f"{spec} is not a pure state")
    rho = make_state(spec, dim, strict=strict)
    if spec.kind == "fock":
        amps = np.zeros(dim, complex)
        amps[spec.params[0]] = 1.0
    elif spec.kind == "coherent":
        amps = _coherent_amplitudes(complex(*spec.params), dim)
    else:
        amps = _squeezed_amplitudes(spec.params[0], spec.params[1], dim)
    return amps / np.linalg.norm(amps), rho.truncation_loss


def product_state(spec1, spec2, dim=TWO_MODE_DIM, *, exact=True, strict=False, tail=1e-20):
    """Product input ``spec1 (x) spec2`` on a ``dim x dim`` two-mode space.

    With ``exact`` the factor cutoffs ``d1, d2 <= dim`` are chosen for
    beam-splitter accuracy. Each factor first gets the cutoff that keeps its
    discarded weight below ``tail``. If then ``d1 + d2 - 1 > dim``, some
    photon-number blocks that carry weight are incomplete on the embedded
    space; this is kept only when that weight is below the loss of the
    best split with ``d1 + d2 - 1 = dim``, which makes every block
    complete. ``truncation_loss`` records the weight of whichever choice is
    made. Without ``exact`` both factors are built directly at ``dim``.
    """
    if not exact:
        a = make_state(spec1, dim, strict=strict)
        b = make_state(spec2, dim, strict=strict)
        return tensor(a, b)
    tail1, tail2 = _tail_weights(spec1, dim), _tail_weights(spec2, dim)
    d1, d2 = natural_cutoff(spec1, tail, dim), natural_cutoff(spec2, tail, dim)
    error = tail1[d1] + tail2[d2]
    if d1 + d2 - 1 > dim:
        pops1, pops2 = -np.diff(tail1)[:d1], -np.diff(tail2)[:d2]
        total = np.add.outer(np.arange(d1), np.arange(d2))
        error += float(np.sum(np.outer(pops1, pops2)[total >= dim]))
        split = np.arange(2, dim)
        split_error = tail1[split] + tail2[dim + 1 - split]
        best = int(np.argmin(split_error))
        # ties go to the split, whose blocks are all complete
        if split_error[best] <= error * (1.0 + 1e-9):
            d1, d2 = int(split[best]), int(dim + 1 - split[best])
            error = float(split_error[best])
    a = make_state(spec1, d1, strict=strict)
    b = make_state(spec2, d2, strict=strict)
    out = embed(tensor(a, b), dim, dim)
    return TwoModeState(out.data, out.dims, max(float(error), out.truncation_loss))


# ---------------------------------------------------------------------------
# Operators

def annihilation(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def ordered_block(pref, x, y, q, dim):
    """Matrices ``<m| pref * exp(x a^dag) q^N exp(y a) |n>`` for m, n < dim.

    ``pref``, ``x`` and ``y`` broadcast together; the result has their shape
    followed by ``(dim, dim)``. Displacements, s-ordered displacements and
    s-parametrized Wigner operators are all of this form. The elements are
    exact (not those of a truncated exponential) and are generated along
    each diagonal by the associated-Laguerre three-term recurrence, which
    stays accurate where the naive double sum cancels catastrophically.
    """
    pref, x, y = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (pref, x, y)))
    out = np.zeros(x.shape + (dim, dim), complex)
    idx = np.arange(dim)
    for a, lower, upper in _ordered_diagonals(pref, x, y, q, dim):
        out[..., idx[a:], idx[: dim - a]] = lower
        if a:
            out[..., idx[: dim - a], idx[a:]] = upper
    return out


def _power_start(pref, z, a):
    # pref * z**a / sqrt(a!), computed in logs so huge and tiny factors cancel
    if a == 0:
        return pref.copy()
    out = np.zeros(z.shape, complex)
    nz = (z != 0) & (pref != 0)
    out[nz] = np.exp(
        np.log(pref[nz]) + a * np.log(z[nz]) - 0.5 * math.lgamma(a + 1)
    )
    return out


def _ordered_diagonals(pref, x, y, q, dim):
    """Yield ``(a, F[n+a, n], F[n, n+a])`` for ``a = 0 .. dim-1``, each over
    ``n = 0 .. dim-1-a`` in the last axis."""
    xy = x * y
    for a in range(dim):
        length = dim - a
        diags = []
        for start in (_power_start(pref, x, a), _power_start(pref, y, a)):
            g = np.empty(x.shape + (length,), complex)
            g[..., 0] = start
            if length > 1:
                g[..., 1] = (q * (1 + a) + xy) * start / math.sqrt(1 + a)
            for n in range(1, length - 1):
                g[..., n + 1] = (
                    (q * (2 * n + 1 + a) + xy) * g[..., n]
                    - q * q * math.sqrt(n * (n + a)) * g[..., n - 1]
                ) / math.sqrt((n + 1) * (n + 1 + a))
            diags.append(g)
            if a == 0:
                diags.append(g)
                break
        yield a, diags[0], diags[1]


def ordered_trace(rho, pref, x, y, q):
    """``Tr[rho E]`` for ``E = ordered_block(pref, x, y, q, dim)`` without
    storing ``E``; vectorized over the broadcast shape of the parameters."""
    rho = np.asarray(rho)
    dim = rho.shape[0]
    pref, x, y = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (pref, x, y)))
    total = np.zeros(x.shape, complex)
    for a, lower, upper in _ordered_diagonals(pref, x, y, q, dim):
        # E[n+a, n] pairs with rho[n, n+a]; E[n, n+a] with rho[n+a, n]
        total += lower @ np.diagonal(rho, a)
        if a:
            total += upper @ np.diagonal(rho, -a)
    return total


def displacement_matrix(alpha, dim, method="exact"):
    """Truncated block of ``D(alpha) = exp(alpha a^dag - alpha* a)``.

    ``method="exact"`` returns the true matrix elements ``<m|D|n>``;
    ``method="expm"`` exponentiates the truncated generator, which is
    unitary on the truncated space but departs from the true elements once
    ``|alpha|^2`` approaches ``dim``.
    """
    if dim < 2:
        raise DomainError("dim must be at least 2")
    alpha = complex(alpha)
    if method == "expm":
        a = annihilation(dim)
        return expm(alpha * a.conj().T - alpha.conjugate() * a)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    return ordered_block(np.exp(-0.5 * abs(alpha) ** 2), alpha, -alpha.conjugate(), 1.0, dim)


def s_ordered_displacement(alpha, s, dim):
    """``D(alpha, s) = D(alpha) exp(s |alpha|^2 / 2)``."""
    if not -1.0 <= s <= 1.0:
        raise DomainError(f"ordering parameter s={s} outside [-1, 1]")
    return displacement_matrix(alpha, dim) * np.exp(0.5 * s * abs(alpha) ** 2)


def squeeze_matrix(r, phi, dim):
    """``S(xi) = exp((xi* a^2 - xi a^dag^2) / 2)`` with ``xi = r e^{i phi}``,
    from the truncated generator."""
    a = annihilation(dim)
    xi = r * np.exp(1j * phi)
    return expm(0.5 * (np.conj(xi) * a @ a - xi * a.conj().T @ a.conj().T))


# ---------------------------------------------------------------------------
# Composition

def tensor(a, b):
    return TwoModeState(
        np.kron(a.data, b.data), (a.dim, b.dim), a.truncation_loss + b.truncation_loss
    )


def reduced_state(rho, mode):
    """Reduced state of ``mode`` (1 or 2), the other mode traced out."""
    t = rho.as_tensor()
    if mode == 1:
        return DensityMatrix(np.einsum("ajbj->ab", t), rho.truncation_loss)
    if mode == 2:
        return DensityMatrix(np.einsum("jajb->ab", t), rho.truncation_loss)
    raise DomainError(f"mode must be 1 or 2, got {mode!r}")


def partial_trace(rho, mode):
    """Trace out ``mode`` (1 or 2) and return the surviving mode's state."""
    if mode not in (1, 2):
        raise DomainError(f"mode must be 1 or 2, got {mode!r}")
    return reduced_state(rho, 3 - mode)


def embed(rho, dim1, dim2=None):
    """Zero-pad a state onto larger cutoffs."""
    if isinstance(rho, DensityMatrix):
        d = rho.dim
        if dim1 < d:
            raise DimensionMismatchError("cannot embed into a smaller space")
        data = np.zeros((dim1, dim1), complex)
        data[:d, :d] = rho.data
        return DensityMatrix(data, rho.truncation_loss)
    d1, d2 = rho.dims
    if dim1 < d1 or dim2 < d2:
        raise DimensionMismatchError("cannot embed into a smaller space")
    data = np.zeros((dim1, dim2, dim1, dim2), complex)
    data[:d1, :d2, :d1, :d2] = rho.as_tensor()
    return TwoModeState(data.reshape(dim1 * dim2, dim1 * dim2), (dim1, dim2), rho.truncation_loss)


def swap_modes(rho):
    d1, d2 = rho.dims
    t = rho.as_tensor().transpose(1, 0, 3, 2)
    return TwoModeState(t.reshape(d1 * d2, d1 * d2), (d2, d1), rho.truncation_loss)


# ---------------------------------------------------------------------------
# Diagnostics

@dataclass(frozen=True)
class Diagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    truncation_loss: float = 0.0

    def ok(self, trace_tol=TOL.trace_construct):
        return (
            self.hermiticity_defect <= TOL.hermitian
            and self.trace_defect <= trace_tol
            and self.min_eigenvalue >= -TOL.psd
        )


def validate(rho):
    """Report Hermiticity, trace and positivity defects; never raises."""
    data = rho.data if hasattr(rho, "data") else np.asarray(rho)
    herm = float(np.max(np.abs(data - data.conj().T))) if data.size else 0.0
    trace_defect = float(abs(np.trace(data) - 1.0))
    min_eig = float(np.linalg.eigvalsh(0.5 * (data + data.conj().T))[0])
    return Diagnostics(herm, trace_defect, min_eig, float(getattr(rho, "truncation_loss", 0.0)))
