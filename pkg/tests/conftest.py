import numpy as np
import pytest

from weylshift.measures import SignedMeasure, metric_d
from weylshift.potentials import oscillating_square_plus_derivative, soliton


@pytest.fixture(scope="session")
def soliton_measure():
    return soliton()


@pytest.fixture(scope="session")
def dr_measure():
    return oscillating_square_plus_derivative()


def random_measure(rng, n_breaks=41, span=3.0, n_atoms=None, amp=1.0):
    """Small random measure on a fixed grid, atoms strictly inside."""
    breaks = np.linspace(-span, span, n_breaks)
    vals = rng.uniform(-amp, amp, n_breaks)
    if n_atoms is None:
        n_atoms = int(rng.integers(0, 3))
    pos = np.sort(rng.uniform(-span + 0.5, span - 0.5, n_atoms))
    while np.any(np.diff(pos) <= 0):
        pos = np.sort(rng.uniform(-span + 0.5, span - 0.5, n_atoms))
    wts = rng.uniform(-amp, amp, n_atoms)
    return SignedMeasure(atom_positions=pos, atom_weights=wts,
                         density_breaks=breaks, density_values=vals)


def certified_ball_instance(rng, eps, n_neighbors):
    """(mu, [nu_j], weights) with metric_d(mu, nu_j) < eps certified.

    Neighbors share mu's atom positions and density grid so convex blends
    are exact; the perturbation is rescaled until the distance certificate
    holds.
    """
    mu = random_measure(rng, n_atoms=int(rng.integers(1, 3)))
    nus = []
    for _ in range(n_neighbors):
        dval = rng.uniform(-1.0, 1.0, mu.density_values.size)
        dw = rng.uniform(-1.0, 1.0, mu.atom_weights.size)
        scale = float(eps)
        nu = None
        for _ in range(80):
            cand = SignedMeasure(mu.atom_positions, mu.atom_weights + scale * dw,
                                 mu.density_breaks, mu.density_values + scale * dval)
            if metric_d(mu, cand) < eps:
                nu = cand
                break
            scale *= 0.5
        assert nu is not None, "could not certify a neighbor"
        nus.append(nu)
    weights = rng.dirichlet(np.ones(n_neighbors))
    return mu, nus, weights
