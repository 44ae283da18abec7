import numpy as np
import pytest

from gaspst.errors import InvalidParameter
from gaspst.scheme import (bose_mesner_check, eigenvalue_spectrum_residual, export_graph,
                           scheme_summary, stratify, symmetrize, with_adjacency)

from conftest import group, scheme, sym_scheme


def test_z2():
    s = scheme("Z2")
    assert np.array_equal(s.adjacency[1], [[0, 1], [1, 0]])
    assert np.allclose(s.P, [[1, 1], [1, -1]]) and np.allclose(s.Q, [[1, 1], [1, -1]])


def test_relation_definition():
    s = scheme("D8")
    g = s.group
    for x in range(g.order):
        for y in range(g.order):
            assert s.relation[x, y] == s.classes.class_of[g.mul[y, g.inv[x]]]


def test_d8_pq():
    s = scheme("D8")
    assert len(s) == 5
    assert np.max(np.abs(s.P @ s.Q - 8 * np.eye(5))) < 1e-9


def test_z3_not_symmetric_and_symmetrizes_to_k3():
    s = scheme("Z3")
    assert not s.symmetric
    assert not np.array_equal(s.adjacency[1], s.adjacency[1].T)
    k3 = symmetrize(s)
    assert k3.symmetric and len(k3) == 2
    assert np.array_equal(k3.adjacency[1], np.ones((3, 3)) - np.eye(3))
    assert bose_mesner_check(k3).ok


def test_symmetrize_identity_on_symmetric():
    s = scheme("D8")
    assert symmetrize(s) is s


def test_symmetrize_idempotent():
    s = sym_scheme("A4xZ2")
    again = symmetrize(s)
    assert np.array_equal(again.adjacency, s.adjacency)
    assert np.allclose(again.P, s.P)


def test_th_symmetrized():
    s = sym_scheme("A4xZ2")
    assert s.symmetric and len(s) == 6
    assert sorted(s.valencies) == [1, 1, 3, 3, 8, 8]
    assert s.real_class_count == 4
    assert bose_mesner_check(s).ok


def test_stratification():
    s = scheme("D8")
    st = stratify(s, 0)
    assert st.strata[0] == (0,)
    assert tuple(len(x) for x in st.strata) == (1, 2, 1, 2, 2)
    assert np.allclose(st.vectors @ st.vectors.conj().T, np.eye(5))
    cube = build_cube()
    assert all(len(x) == 1 for x in stratify(cube, 0).strata)
    with pytest.raises(InvalidParameter):
        stratify(s, 8)


def build_cube():
    from gaspst.groups import direct_product, make_cyclic
    from gaspst.scheme import build_scheme

    z = make_cyclic(2)
    return build_scheme(direct_product(direct_product(z, z), z))


@pytest.mark.parametrize("name", ["D8", "CL3", "A4xZ2", "Z7"])
def test_bose_mesner(name):
    rep = bose_mesner_check(scheme(name))
    assert rep.ok, rep.failures()
    assert rep.residuals["bose_mesner"] == 0


def test_corruption_detected():
    s = scheme("D8")
    adj = s.adjacency.copy()
    adj[1, 0, 1] ^= 1
    rep = bose_mesner_check(with_adjacency(s, adj))
    assert "sum_is_J" in rep.failures()


@pytest.mark.parametrize("name", ["D8", "D12", "CL3", "Z5", "A4xZ2"])
def test_eigenvalue_multisets(name):
    assert eigenvalue_spectrum_residual(scheme(name)) < 1e-8


def test_abelian_p_is_character_table():
    for name in ("Z4", "Z6", "Z8"):
        s = scheme(name)
        assert np.max(np.abs(s.P - s.characters.chi)) < 1e-12


def test_cube_graph():
    cube = build_cube()
    g = cube.group
    weight1 = [cube.class_of(x) for x in range(8) if g.labels[x].count("1") == 1]
    text = export_graph(cube, weight1)
    edges = [line for line in text.splitlines() if not line.startswith("#")]
    assert len(edges) == 12
    assert "# directed: no" in text


def test_d8_graph_and_degenerate():
    s = scheme("D8")
    edges = [tuple(map(int, l.split())) for l in export_graph(s, 1).splitlines() if l[0] != "#"]
    degree = np.bincount(np.array(edges).ravel(), minlength=8)
    assert len(edges) == 8 and set(degree) == {2}
    assert "degenerate" in export_graph(s, 0)
    with pytest.raises(InvalidParameter):
        export_graph(s, 5)


def test_directed_export():
    text = export_graph(scheme("Z3"), 1)
    assert "# directed: yes" in text
    assert len([l for l in text.splitlines() if l[0] != "#"]) == 3


def test_summary():
    out = scheme_summary(scheme("D8"))
    assert out["valencies"] == [1, 2, 1, 2, 2]
    assert out["multiplicities"] == [1, 1, 1, 1, 4]
    assert out["symmetric"] is True
    assert group("D8").order == out["order"]
