"""DPFL simulator and Pareto-analysis toolkit.

Simulates differentially private federated SGD over (noise level,
communication rounds, sample ratio) grids, extracts the empirical
utility/privacy Pareto set, and compares it against the closed-form
solutions built on the manifold law k * sigma^2 * T = q * K, which also
powers low-cost noise-level design.
"""

__version__ = "0.1.0"
