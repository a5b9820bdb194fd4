"""Communication-complexity laboratory.

Exact small-scale tools for two-party protocols: a quantum information
kernel (:mod:`cclab.qmath`), a classical protocol engine, pointer jumping,
the Greater-Than trade-off protocol, and numerical checks of direct-sum and
cut-and-paste style inequalities.
"""

__version__ = "0.1.0"
