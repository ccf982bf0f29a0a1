"""Regression lab for randomized ensembles.

Random forests and randomized forward selection side by side with lasso-family
baselines, a Monte-Carlo degrees-of-freedom estimator, and the experiment
harness that drives the SNR sweeps.
"""

__version__ = "0.1.0"
