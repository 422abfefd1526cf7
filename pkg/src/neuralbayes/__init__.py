"""Amortized neural Bayes estimation laboratory.

Simulators for parametric models, a small numpy feedforward network with
restricted training, Bayes baselines, risk decomposition and closed-form
generalization bound calculators.
"""

__version__ = "0.1.0"
