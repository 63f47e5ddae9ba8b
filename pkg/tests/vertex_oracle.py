"""Brute-force LP optimum over a bounded box by enumerating basic solutions."""

import itertools

import numpy as np


def vertex_optimum(c, A, senses, b, tol=1e-9):
    """min c'x over {A x (senses) b, 0 <= x <= 1}; returns None when infeasible."""
    m, n = A.shape
    # every constraint as a hyperplane a'x = beta
    planes = [(A[r], b[r]) for r in range(m)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes += [(e, 0.0), (e, 1.0)]
    P = np.array([p[0] for p in planes])
    beta = np.array([p[1] for p in planes])
    combos = np.array(list(itertools.combinations(range(len(planes)), n)))
    M = P[combos]
    rhs = beta[combos]
    ok = np.abs(np.linalg.det(M)) > 1e-9
    M, rhs = M[ok], rhs[ok]
    if len(M) == 0:
        return None
    X = np.linalg.solve(M, rhs[..., None])[..., 0]
    lhs = X @ A.T
    feas = np.all((X >= -tol) & (X <= 1 + tol), axis=1)
    for r, s in enumerate(senses):
        if s == "<=":
            feas &= lhs[:, r] <= b[r] + tol
        elif s == ">=":
            feas &= lhs[:, r] >= b[r] - tol
        else:
            feas &= np.abs(lhs[:, r] - b[r]) <= tol
    if not feas.any():
        return None
    return float((X[feas] @ c).min())


def random_lp(rng, n_max=6, m_max=6):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    b = rng.integers(-4, 8, size=m).astype(float)
    senses = list(rng.choice(["<=", ">=", "="], size=m, p=[0.45, 0.45, 0.1]))
    c = rng.integers(-5, 6, size=n).astype(float)
    return c, A, senses, b
