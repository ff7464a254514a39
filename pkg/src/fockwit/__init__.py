"""Truncated Fock-space toolkit linking single-mode phase-space
nonclassicality to two-mode entanglement at a beam splitter."""

__version__ = "0.1.0"

from .config import TOL, Tolerances  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .fock import (  # noqa: E402
    DensityMatrix,
    TwoModeState,
    make_state,
    parse_spec,
    reduced_state,
    product_state,
    tensor,
    validate,
)
from .phase_space import PhaseGrid, SParam, char_fn, qpd, scan_qpd  # noqa: E402
from .network import BeamSplitter, LossChannel, MziConfig, apply_bs, run_mzi  # noqa: E402
from .entanglement import pt_report, lossy_bell_state  # noqa: E402
from .cv_witness import criterion_check, cv_witness_expectation, product_criterion  # noqa: E402
