"""virblocks: exact quantum-group data (U_q(sl2) Clebsch-Gordan, 6j symbols,
conformal-block vectors) and Virasoro first-row intertwiner machinery
(singular vectors, fusion rules, Frobenius-series blocks), with machine
checks of the series/PDE correspondence and 6j-governed associativity.
"""

__version__ = "0.1.0"
