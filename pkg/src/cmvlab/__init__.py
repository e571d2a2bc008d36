"""CMV matrices and the finite Ablowitz-Ladik hierarchy."""
