from ._simplex import (
    BarycentricProblem,
    BarycentricCertificate,
    Infeasible,
    NumericalFailure,
    solve_barycentric_min,
    hull_contains,
)


__all__ = [
    "BarycentricProblem",
    "BarycentricCertificate",
    "Infeasible",
    "NumericalFailure",
    "solve_barycentric_min",
    "hull_contains",
]
