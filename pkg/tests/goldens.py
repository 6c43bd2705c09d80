"""Frozen expected values, all computed with the independent references in
``oracles.py`` (adaptive dense-ODE integration at rtol=1e-11 and the
elementwise dense Hamiltonian) before the main implementation was trusted.
"""

# Final NOON fidelity of the two-step sweep, tau=5 (total time 10), no bias.
BS1_FIDELITY_TAU5 = {
    2: 0.986698338995,
    4: 0.996583864748,
    6: 0.993394304010,
    8: 0.995670824391,
}

# Bias-degraded BS1 at N=8, tau=5: delta -> (fidelity, p_up, p_down).
BIAS_N8_TAU5 = {
    0.05: (0.885962733528, 0.185539647046, 0.810708948652),
    0.10: (0.723387515536, 0.054637891169, 0.939100778699),
}

# Full spectrum of the chain at the sweep midpoint (N=3, J=1, B=1).
EIGENVALUES_N3_MIDPOINT = [
    -3.535445470895,
    -2.703620539143,
    -0.875000000000,
    -0.097155212433,
    0.118375127393,
    1.125000000000,
    2.507600683328,
    3.460245411750,
]
