"""Code generators shared by several test modules."""

import numpy as np

from aldc import CodeConfig
from aldc.constructions import hypercube
from aldc.core import tuple_span_weights


def planted_code(d, alpha, seed, cube_dim=7, sigma=None):
    """Noisy copy of a small hypercube hidden in random coordinates of R^d.

    Points get random positive scales and Gaussian noise in every
    coordinate; only cube edges whose span weight still reaches ``alpha``
    are kept.  The result verifies at ``alpha`` with density well above
    zero, which random sphere codes in d=20 rarely do.
    """
    rng = np.random.default_rng(seed)
    cube = hypercube(cube_dim)
    axes = rng.choice(d, size=cube_dim, replace=False)
    sigma = rng.uniform(0.05, 0.35) if sigma is None else sigma
    pts = rng.normal(0.0, sigma, size=(cube.n, d))
    pts[:, axes] += cube.points + rng.normal(0.0, 1.0, size=cube_dim)
    # a large common offset off the cube axes keeps the matched coordinates light
    rest = np.setdiff1d(np.arange(d), axes)
    pts[:, rest] += rng.uniform(3.0, 6.0, size=rest.size) * rng.choice([-1.0, 1.0], size=rest.size)
    pts *= rng.uniform(0.5, 2.0, size=(cube.n, 1))
    code = CodeConfig.build(pts, 2)
    matchings = {}
    for m in cube.matchings:
        i = int(axes[m.direction])
        w = tuple_span_weights(code, m.tuples)[:, i]
        matchings[i] = [t for t, x in zip(m.tuples, w) if x >= alpha]
    return code.with_matchings(matchings)


def multiscale_cube(d, scales, sigma, seed):
    """Disjoint copies of {0,1}^d scaled by each factor, spread far apart."""
    rng = np.random.default_rng(seed)
    cube = hypercube(d)
    blocks, matchings = [], {i: [] for i in range(d)}
    offset = 0.0
    for b, s in enumerate(scales):
        pts = cube.points * s + rng.normal(0.0, sigma, size=cube.points.shape)
        pts[:, 0] += offset
        offset += 10.0 * s + 10.0
        blocks.append(pts)
        for m in cube.matchings:
            matchings[m.direction] += [(x + b * cube.n, y + b * cube.n) for x, y in m.tuples]
    return CodeConfig.build(np.vstack(blocks), 2, matchings)
