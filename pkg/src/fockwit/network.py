"""Beam splitters, amplitude-loss channels and the lossy Mach-Zehnder pipeline.

Convention: ``U = exp[theta (a^dag b - a b^dag)]`` with ``t = cos theta``,
so that ``U^dag a U = t a + r b`` and ``U^dag b U = -r a + t b``. In the
Schrodinger picture a photon entering port 1 leaves as ``t|10> - r|01>``.
Loss ``eta`` is an amplitude transmissivity.
"""

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .config import TOL, TWO_MODE_DIM
from .errors import DegenerateLossError, DimensionMismatchError, DomainError
from .fock import DensityMatrix, TwoModeState, parse_spec, product_state

__all__ = [
    "BeamSplitter",
    "LossChannel",
    "MziConfig",
    "beam_splitter_unitary",
    "apply_bs",
    "apply_bs_amplitudes",
    "loss_kraus",
    "loss_channel_apply",
    "apply_local_kraus",
    "apply_two_mode_loss",
    "mzi_optimal_bs",
    "run_mzi",
    "smoothing_parameter",
    "analytic_mzi_marginal_char",
    "mzi_marginal_char_exact",
    "mzi_contraction",
]


@dataclass(frozen=True)
class BeamSplitter:
    """Real transmissivity ``t`` and reflectivity ``r`` amplitudes."""

    t: float
    r: float

    def __post_init__(self):
        t, r = float(self.t), float(self.r)
        if not (0.0 <= t <= 1.0 and 0.0 <= r <= 1.0):
            raise DomainError(f"t={t}, r={r} must lie in [0, 1]")
        if abs(t * t + r * r - 1.0) > TOL.hermitian:
            raise DomainError(f"t^2 + r^2 = {t * t + r * r!r}, expected 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_t(cls, t):
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"t={t} must lie in [0, 1]")
        return cls(t, math.sqrt(max(0.0, 1.0 - t * t)))

    @classmethod
    def from_theta(cls, theta):
        theta = float(theta)
        if not 0.0 <= theta <= math.pi / 2:
            raise DomainError("theta must lie in [0, pi/2] for real nonnegative t, r")
        return cls(math.cos(theta), math.sin(theta))

    @classmethod
    def balanced(cls):
        return cls(math.sqrt(0.5), math.sqrt(0.5))

    @property
    def theta(self):
        return math.atan2(self.r, self.t)

    def to_dict(self):
        return {"t": self.t, "r": self.r}


@dataclass(frozen=True)
class LossChannel:
    eta: float

    def __post_init__(self):
        eta = float(self.eta)
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"eta={eta} must lie in [0, 1]")
        object.__setattr__(self, "eta", eta)


# ---------------------------------------------------------------------------
# Beam splitter

@lru_cache(maxsize=64)
def _bs_blocks(theta, dim1, dim2):
    blocks = []
    for total in range(dim1 + dim2 - 1):
        n1 = np.arange(max(0, total - dim2 + 1), min(total, dim1 - 1) + 1)
        index = n1 * dim2 + (total - n1)
        # a^dag b |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
        up = np.sqrt((n1[:-1] + 1.0) * (total - n1[:-1]))
        gen = np.diag(up, -1) - np.diag(up, 1)
        block = expm(theta * gen)
        index.flags.writeable = block.flags.writeable = False
        blocks.append((index, block))
    return tuple(blocks)


@lru_cache(maxsize=16)
def _bs_unitary(theta, dim1, dim2):
    size = dim1 * dim2
    u = np.zeros((size, size))
    for index, block in _bs_blocks(theta, dim1, dim2):
        u[np.ix_(index, index)] = block
    u.flags.writeable = False
    return u


def beam_splitter_unitary(bs, dim1, dim2):
    """``exp[theta (a^dag b - a b^dag)]`` on the truncated product space.

    Built one total-photon-number block at a time, so it conserves
    ``n1 + n2`` exactly. Blocks with ``n1 + n2 < min(dim1, dim2)`` are fully
    represented and therefore exact; higher blocks are the exponential of
    the truncated generator. The result is real orthogonal and read-only.
    """
    if dim1 < 2 or dim2 < 2:
        raise DomainError("dims must be at least 2")
    return _bs_unitary(float(bs.theta), int(dim1), int(dim2))


def apply_bs(rho, bs, *, inverse=False):
    """``U rho U^dag``, or ``U^dag rho U`` with ``inverse``."""
    if not isinstance(rho, TwoModeState):
        raise DimensionMismatchError("apply_bs expects a TwoModeState")
    u = beam_splitter_unitary(bs, *rho.dims)
    if inverse:
        u = u.T
    return TwoModeState(u @ rho.data @ u.T, rho.dims, rho.truncation_loss)


def apply_bs_amplitudes(psi, bs, *, inverse=False):
    """Beam splitter on a pure two-mode state given as a ``(dim1, dim2)``
    amplitude table ``psi[n1, n2]``; works block by block, so large
    cutoffs stay cheap."""
    psi = np.asarray(psi, dtype=complex)
    d1, d2 = psi.shape
    flat = psi.ravel()
    out = np.zeros_like(flat)
    for index, block in _bs_blocks(float(bs.theta), d1, d2):
        out[index] = (block.T if inverse else block) @ flat[index]
    return out.reshape(d1, d2)


# ---------------------------------------------------------------------------
# Loss

def loss_kraus(eta, dim):
    """Kraus operators ``E_k``, ``k = 0 .. dim-1``, stacked as ``(dim, dim, dim)``.

    ``<n-k| E_k |n> = sqrt(C(n, k)) eta^(n-k) (1 - eta^2)^(k/2)``.
    """
    eta = LossChannel(eta).eta
    kraus = np.zeros((dim, dim, dim))
    n = np.arange(dim)
    for k in range(dim):
        m = n[k:] - k
        log_binom = gammaln(n[k:] + 1) - gammaln(k + 1) - gammaln(m + 1)
        with np.errstate(divide="ignore"):
            amp = np.exp(0.5 * log_binom) * np.power(eta, m) * (1.0 - eta * eta) ** (0.5 * k)
        kraus[k, m, n[k:]] = amp
    return kraus


def loss_channel_apply(rho, ch):
    """Attenuate a single-mode state by amplitude transmissivity ``ch.eta``."""
    eta = ch.eta if isinstance(ch, LossChannel) else LossChannel(ch).eta
    kraus = loss_kraus(eta, rho.dim)
    out = np.einsum("kab,bc,kdc->ad", kraus, rho.data, kraus)
    return DensityMatrix(out, rho.truncation_loss)


def apply_local_kraus(rho, kraus, mode):
    """Apply a Kraus family ``(K, d, d)`` to one mode of a two-mode state."""
    t = rho.as_tensor()
    if mode == 1:
        out = np.einsum("kai,ijbl,kcb->ajcl", kraus, t, kraus.conj(), optimize=True)
    elif mode == 2:
        out = np.einsum("kai,jibl,kcl->jabc", kraus, t, kraus.conj(), optimize=True)
    else:
        raise DomainError(f"mode must be 1 or 2, got {mode!r}")
    d1, d2 = rho.dims
    return TwoModeState(out.reshape(d1 * d2, d1 * d2), rho.dims, rho.truncation_loss)


def apply_two_mode_loss(rho, eta1, eta2):
    """Independent amplitude loss on each mode."""
    d1, d2 = rho.dims
    out = rho
    if eta1 != 1.0:
        out = apply_local_kraus(out, loss_kraus(eta1, d1), 1)
    if eta2 != 1.0:
        out = apply_local_kraus(out, loss_kraus(eta2, d2), 2)
    return out


# ---------------------------------------------------------------------------
# Mach-Zehnder interferometer

def mzi_optimal_bs(eta1, eta2):
    """Output splitter that cancels the second input port after arm losses:
    ``t = eta2 / N``, ``r = eta1 / N`` with ``N = sqrt(eta1^2 + eta2^2)``."""
    eta1 = LossChannel(eta1).eta
    eta2 = LossChannel(eta2).eta
    norm = math.hypot(eta1, eta2)
    if norm == 0.0:
        raise DegenerateLossError("both arms fully lossy; output splitter undefined")
    return BeamSplitter(eta2 / norm, eta1 / norm)


@dataclass(frozen=True)
class MziConfig:
    """Lossy interferometer setup. ``output_bs`` is a :class:`BeamSplitter`
    or ``"auto"`` (resolved by :func:`mzi_optimal_bs`)."""

    input1: str
    input2: str
    eta1: float = 1.0
    eta2: float = 1.0
    output_bs: object = "auto"
    dim: int = TWO_MODE_DIM

    def __post_init__(self):
        parse_spec(self.input1)
        parse_spec(self.input2)
        LossChannel(self.eta1)
        LossChannel(self.eta2)
        bs = self.output_bs
        if isinstance(bs, dict):
            object.__setattr__(self, "output_bs", BeamSplitter(bs["t"], bs["r"]))
        elif not (bs == "auto" or isinstance(bs, BeamSplitter)):
            raise DomainError("output_bs must be 'auto' or a BeamSplitter")

    def resolved_bs(self):
        if self.output_bs == "auto":
            return mzi_optimal_bs(self.eta1, self.eta2)
        return self.output_bs

    def to_dict(self):
        bs = self.output_bs if self.output_bs == "auto" else self.output_bs.to_dict()
        return {
            "input1": str(self.input1),
            "input2": str(self.input2),
            "eta1": self.eta1,
            "eta2": self.eta2,
            "output_bs": bs,
            "dim": self.dim,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def run_mzi(cfg, *, strict=False):
    """Product input, balanced splitter, per-arm loss, recombining splitter.

    The recombining splitter acts as ``U^dag`` of the resolved ``(t, r)``
    splitter; with the optimal choice this routes the first input back to
    output mode 1 and cancels the second input there. Inputs are embedded
    with cutoffs whose photon-number blocks are complete, so every stage is
    free of truncation error.
    """
    rho = product_state(cfg.input1, cfg.input2, cfg.dim, strict=strict)
    rho = apply_bs(rho, BeamSplitter.balanced())
    rho = apply_two_mode_loss(rho, cfg.eta1, cfg.eta2)
    return apply_bs(rho, cfg.resolved_bs(), inverse=True)


def smoothing_parameter(eta1, eta2):
    """Closed-form smoothing parameter ``-(eta1 - eta2)^2 / (eta1^2 + eta2^2)``."""
    norm2 = eta1 * eta1 + eta2 * eta2
    if norm2 == 0.0:
        raise DegenerateLossError("both arms fully lossy")
    return -((eta1 - eta2) ** 2) / norm2


def mzi_contraction(eta1, eta2):
    """Amplitude ``c = sqrt(2) eta1 eta2 / sqrt(eta1^2 + eta2^2)`` by which the
    first input's displacement argument is rescaled at output mode 1."""
    norm = math.hypot(eta1, eta2)
    if norm == 0.0:
        raise DegenerateLossError("both arms fully lossy")
    return math.sqrt(2.0) * eta1 * eta2 / norm


def analytic_mzi_marginal_char(chi_in1, eta1, eta2, beta):
    """Closed-form symmetric characteristic function of output mode 1:
    ``chi_in(c beta) exp[-(eta1 - eta2)^2 |beta|^2 / (2 (eta1^2 + eta2^2))]``.

    Simulation shows this form misses the vacuum-noise term ``-(1 - c^2)|beta|^2 / 2`` whenever ``c < 1``; see
    :func:`mzi_marginal_char_exact`.
    """
    beta = np.asarray(beta, dtype=complex)
    c = mzi_contraction(eta1, eta2)
    gauss = np.exp(0.5 * smoothing_parameter(eta1, eta2) * np.abs(beta) ** 2)
    return chi_in1(c * beta) * gauss


def mzi_marginal_char_exact(chi_in1, eta1, eta2, beta, s=0.0):
    """s-ordered characteristic function of output mode 1 under the optimal
    recombining splitter: ``chi_in(c beta, s) exp[-(1-s)(1-c^2)|beta|^2 / 2]``.

    ``chi_in1`` must be the s-ordered characteristic function of input 1.
    At ``s = 1`` this is the exact rescaling ``chi_in(c beta, 1)``.
    """
    beta = np.asarray(beta, dtype=complex)
    c = mzi_contraction(eta1, eta2)
    return chi_in1(c * beta) * np.exp(-0.5 * (1.0 - s) * (1.0 - c * c) * np.abs(beta) ** 2)
