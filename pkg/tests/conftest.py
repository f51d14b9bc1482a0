import itertools
import time

import numpy as np
import pytest

from anisoinc.fbsolver import Grid, construct_coincidence_set
from anisoinc.obstacle import ObstacleSpec, eval_obstacle


def signed_permutation_invariant(region, n: int) -> bool:
    """Exact voxel-set invariance under the 48 signed axis permutations."""
    idx = {tuple(r) for r in region.indices}
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((0, 1), repeat=3):
            mapped = {
                tuple(r[perm[k]] if signs[k] == 0 else n - 1 - r[perm[k]] for k in range(3))
                for r in idx
            }
            if mapped != idx:
                return False
    return True


def random_rotation(rng) -> np.ndarray:
    M = rng.normal(size=(3, 3))
    Q, R = np.linalg.qr(M)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def _build(spec: ObstacleSpec, grid: Grid, **kw):
    t0 = time.perf_counter()
    res = construct_coincidence_set(grid, lambda p: eval_obstacle(spec, p), tol=1e-9, **kw)
    return res, spec, grid, time.perf_counter() - t0


@pytest.fixture(scope="session")
def omega1_construction():
    """The quartic-obstacle construction at the figure parameters, n=64."""
    return _build(ObstacleSpec(family="quartic", C=1 / 36), Grid(n=64, L=1.2),
                  track_energy=True)


@pytest.fixture(scope="session")
def omega1_construction_96():
    return _build(ObstacleSpec(family="quartic", C=1 / 36), Grid(n=96, L=1.2))


@pytest.fixture(scope="session")
def omega2_construction():
    """The sextic-plus-log obstacle construction (quartic eigenstrain case)."""
    from anisoinc.obstacle import obstacle_radius

    spec = ObstacleSpec(family="even_degree_log", C=1 / 36, beta=1 / 600, n=4, C_hat=1 / 36)
    return _build(spec, Grid(n=64, L=1.25 * obstacle_radius(spec)))
