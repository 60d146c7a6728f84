"""Hand-built gadget families where every non-hub vertex is good.

Each gadget is a pair of hubs ``lo -> hi``. Every ordinary vertex beats
every ``lo`` hub and loses to every ``hi`` hub, except that ``lo`` of gadget
alpha beats the block ``D(alpha)`` and ``hi`` loses to ``E(alpha)``. The
blocks D are pairwise disjoint, as are the blocks E, so each ordinary vertex
misses at most one S- set and one S+ set. Ordinary vertices among
themselves form a seeded uniform tournament.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from tourpart.gadgets import Gadget, GadgetFamily, classify_vertices, compute_X
from tourpart.generators import random_tournament
from tourpart.profile import ConstantsProfile
from tourpart.tournament import Tournament

PLANTED = ConstantsProfile(
    name="planted",
    rho=6,
    sigma1=16,
    sigma2=1,
    sigma3=1,
    tau1=Fraction(8),
    tau2=Fraction(2),
    tau3=Fraction(2),
    separation=Fraction(1),
    bad_degree_factor=Fraction(2),
    good_degree_factor=Fraction(2),
    leftover_factor=Fraction(2),
    leftover_kt_factor=Fraction(4),
)


def planted_instance(gadgets: int, block: int, extra: int, k: int, t: int, seed: int = 0):
    """Return (T, family). Hubs are vertices 0..2*gadgets-1 (lo = 2a, hi = 2a+1)."""
    ordinary = gadgets * block + extra
    n = 2 * gadgets + ordinary
    base = random_tournament(ordinary, seed).to_matrix()
    m = np.zeros((n, n), dtype=bool)
    h = 2 * gadgets
    m[h:, h:] = base
    lo = np.arange(0, h, 2)
    hi = lo + 1
    # lo hubs beat every hi hub; hubs of each kind form a transitive order
    m[np.ix_(lo, hi)] = True
    for i in range(gadgets):
        m[lo[i], lo[i + 1:]] = True
        m[hi[i], hi[i + 1:]] = True
    m[h:, lo] = True
    m[hi, h:] = True
    rng = np.random.default_rng(seed)
    d_perm = h + rng.permutation(ordinary)
    e_perm = h + rng.permutation(ordinary)
    for a in range(gadgets):
        D = d_perm[a * block:(a + 1) * block]
        E = e_perm[a * block:(a + 1) * block]
        m[D, lo[a]] = False
        m[lo[a], D] = True
        m[hi[a], E] = False
        m[E, hi[a]] = True
    T = Tournament.from_matrix(m)
    gs = []
    for a in range(gadgets):
        g = Gadget(a, int(hi[a]), int(lo[a]), (int(hi[a]),), (int(lo[a]),), (int(lo[a]), int(hi[a])))
        gs.append(Gadget(g.id, g.hub_out, g.hub_in, g.S_plus, g.S_minus, g.path, compute_X(T, g)))
    family = classify_vertices(T, GadgetFamily(n, k, t, tuple(gs)), k, t)
    return T, family
