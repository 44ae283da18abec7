from functools import lru_cache

import numpy as np
import pytest

from gaspst.groups import (direct_product, from_cayley_table, make_alternating, make_clifford,
                           make_cyclic, make_dihedral)
from gaspst.scheme import build_scheme, symmetrize

BUILDERS = {
    **{f"Z{n}": (lambda n=n: make_cyclic(n)) for n in range(1, 9)},
    "D6": lambda: make_dihedral(6),
    "D8": lambda: make_dihedral(8),
    "D12": lambda: make_dihedral(12),
    "CL3": lambda: make_clifford(3),
    "CL4": lambda: make_clifford(4),
    "A4": lambda: make_alternating(4),
    # T_h as A_4 x C_2, with A_4 coming in as a bare Cayley table
    "A4xZ2": lambda: direct_product(from_cayley_table(make_alternating(4).mul, name="A4"),
                                    make_cyclic(2)),
}


@lru_cache(maxsize=None)
def group(name):
    return BUILDERS[name]()


@lru_cache(maxsize=None)
def scheme(name):
    return build_scheme(group(name))


@lru_cache(maxsize=None)
def sym_scheme(name):
    return symmetrize(scheme(name))


def by_element(s, predicate):
    """Index of the unique class of ``s`` whose members satisfy ``predicate``."""
    hits = [i for i in range(len(s)) if all(predicate(x) for x in s.members(i))]
    assert len(hits) == 1, hits
    return hits[0]


def th_classes(s):
    """Paper-style T_h labels -> class indices of the symmetrized A4 x Z2 scheme.

    The second factor's nontrivial element plays the inversion; double
    transpositions have order 2 in A_4, 3-cycles order 3.
    """
    def part(x):
        return divmod(x, 2)

    base = from_cayley_table(make_alternating(4).mul)

    def order_a4(x):
        return base.element_order(part(x)[0])

    return {
        "inversion": by_element(s, lambda x: part(x) == (0, 1)),
        "dt": by_element(s, lambda x: order_a4(x) == 2 and part(x)[1] == 0),
        "dt_inv": by_element(s, lambda x: order_a4(x) == 2 and part(x)[1] == 1),
        "3c": by_element(s, lambda x: order_a4(x) == 3 and part(x)[1] == 0),
        "3c_inv": by_element(s, lambda x: order_a4(x) == 3 and part(x)[1] == 1),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
