"""Closed-form aggregation of exponentially many cycle inequalities.

Modules:
    instances    graphs, 3-CNF formulas, interior points, DIMACS I/O
    formulation  inequality systems, clause joins, chain classification, metrics
    polyalg      exact rational multivariate polynomials
    proofkernel  positivity proof trees and sum-of-squares certificates
    jproduct     join products of small tensors
    walkagg      odd-cycle walk potential for independent set
    mobiusagg    mobius-cycle potential for 3-SAT
    expsup       exponential-sum kernel approximations
    oracles      brute-force reference implementations
    cli          command-line interface
"""

__version__ = "0.1.0"
