"""
Singlet Stabilization Simulator
Driven-dissipative preparation of an entangled two-transmon singlet
"""

__version__ = "1.0.0"
__description__ = "Master-equation simulation, analytic rates and frequency tuning for singlet stabilization"
