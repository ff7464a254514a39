"""Numerical tolerances and truncation defaults shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Tolerance record. Instances are immutable; pass a modified copy
    (``dataclasses.replace``) to override a value locally."""

    hermitian: float = 1e-12
    trace_construct: float = 1e-12
    trace_channel: float = 1e-6
    psd: float = 1e-10
    mixture_weights: float = 1e-9
    truncation_tail: float = 1e-6
    s_max: float = 0.99
    qpd_imag: float = 1e-8
    witness_imag: float = 1e-6
    nonclassical: float = 1e-6
    pt: float = 1e-8
    pt_floor: float = 1e-12
    finite_witness: float = 1e-9
    grid_decay: float = 1e-8
    gram_condition: float = 1e12


TOL = Tolerances()

SINGLE_MODE_DIM = 40
TWO_MODE_DIM = 25

SCAN_RADIUS = 5.0
SCAN_POINTS = 101
QUADRATURE_RADIUS = 6.0
QUADRATURE_POINTS = 121
