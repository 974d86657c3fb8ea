"""floqlab: simulation lab for a driven transmon-cavity energy pump.

Core layers: Hilbert spaces and Hamiltonian builders, channel schedules and
line-filter tools, unitary/Lindblad propagators, experiment runners, and the
spectral/topological analysis used to judge them.  The `floqlab` CLI drives
config-described experiment runs.
"""

__version__ = "0.1.0"
