"""Partial-transpose spectrum of the lossy single-photon Bell state.

The smallest eigenvalue stays negative for every nonzero transmissivity.
"""

from fockwit.entanglement import lossy_bell_pt_eigenvalues, lossy_bell_state, pt_eigenvalues

print("eta    lam4 (simulated)   lam4 (closed form)")
for eta in (0.05, 0.2, 0.5, 0.8, 1.0):
    sim = min(pt_eigenvalues(lossy_bell_state(eta)))
    print(f"{eta:4.2f}   {sim:+.6e}      {lossy_bell_pt_eigenvalues(eta)[-1]:+.6e}")
