"""Symmetric k-local disentanglers, folded QCA circuits and monitored Clifford dynamics."""

__version__ = "0.1.0"
