"""Deterministic Web3 protocol simulator and architecture evaluation harness.

Identity, transactions, contract execution, consensus confirmation and
state retrieval compose into twelve architectural design types, which a
scenario harness measures and scores against a pinned reference matrix.
"""

__version__ = "0.1.0"
