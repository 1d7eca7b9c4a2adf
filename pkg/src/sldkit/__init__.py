"""sldkit: numerical toolkit for quantum estimation built around the
symmetric logarithmic derivative.

Computes the SLD, quantum/classical Fisher information by independent
routes, the relative entropy of coherence and its curvature along state
families, the SLD-induced qubit (x) sector tensor product structure,
noiseless and noisy GHZ/NOON phase- and frequency-estimation protocols,
and criticality-enhanced estimation on dense spin models.
"""

from . import critical, errors, estimation, ghz_noise, linalg, probes, states, tps

__all__ = [
    "critical",
    "errors",
    "estimation",
    "ghz_noise",
    "linalg",
    "probes",
    "states",
    "tps",
]

__version__ = "0.1.0"
