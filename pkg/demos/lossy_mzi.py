"""Single photon through a lossy Mach-Zehnder interferometer.

Compares the simulated output-mode characteristic function against the
vacuum-noise-corrected closed form and prints the output Wigner minimum.
"""

import numpy as np

from fockwit import MziConfig, char_fn, make_state, reduced_state, run_mzi, scan_qpd
from fockwit.network import mzi_marginal_char_exact

rho_in = make_state("fock:1", 10)
betas = np.linspace(-2, 2, 21) + 0.3j
for eta1, eta2 in ((0.9, 0.9), (0.8, 0.6), (0.6, 0.6)):
    out = reduced_state(run_mzi(MziConfig("fock:1", "coherent:2,0", eta1, eta2)), 1)
    exact = mzi_marginal_char_exact(lambda b: char_fn(rho_in, b, 0.0), eta1, eta2, betas)
    defect = np.max(np.abs(char_fn(out, betas, 0.0) - exact))
    print(f"eta=({eta1}, {eta2})  char-fn defect {defect:.1e}  output W min {scan_qpd(out, 0.0).min_value:+.4f}")
