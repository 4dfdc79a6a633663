import numpy as np
import pytest
from scipy.spatial import cKDTree

from dcf2d.core import dominance_between, nondominated_mask
from dcf2d.oracle import (CouplingType, classify_coupling, farthest_point_subsample, label_fronts,
                          reference_front, relevant_constraints, sample_grid)
from dcf2d.problems import REGISTRY, _ct, get_problem


@pytest.fixture(scope="module")
def labelled():
    return {name: label_fronts(sample_grid(get_problem(name), 1001)) for name in sorted(REGISTRY)}


def test_resolution_two_grid():
    s = sample_grid(get_problem("CT-A"), 2)
    assert len(s) == 4 and s.labels == {}
    with pytest.raises(ValueError):
        sample_grid(get_problem("CT-A"), 1)


def test_attainable_region(labelled):
    for s in labelled.values():
        total = s.F.sum(axis=1)
        assert np.all(total >= 1 - 1e-12)
        flat = s.X[:, 1] == 0
        assert np.all(total[flat] == 1.0)


def test_unconstrained_problem():
    p = _ct("free", lambda f1, f2: np.zeros((len(f1), 0)), 5)
    s = label_fronts(sample_grid(p, 101))
    assert np.array_equal(s.labels["CPF"], s.labels["UPF"])
    assert not s.labels["ICPF"].any()


def test_ct_d_labels(labelled):
    s = labelled["CT-D"]
    cpf = s.front("CPF")
    assert np.all(np.abs(cpf.sum(axis=1) - 1.4) <= s.step)
    assert np.array_equal(s.labels["ICPF"], s.labels["CPF"])
    assert s.labels["RCPF_2"].any() and not s.labels["RCPF_1"].any()


def test_ct_a_has_no_icpf(labelled):
    assert not labelled["CT-A"].labels["ICPF"].any()


@pytest.mark.parametrize("name,expected", [("CT-A", "A"), ("CT-B", "B"), ("CT-C", "C"), ("CT-D", "D")])
def test_types(labelled, name, expected):
    assert classify_coupling(labelled[name]) is CouplingType(expected)


def test_duplicate_half_plane_is_type_a():
    cut = lambda f1, f2: 1.4 - (2 * f1 + f2)
    p = _ct("dup", lambda f1, f2: np.column_stack([cut(f1, f2), cut(f1, f2)]), 5)
    s = label_fronts(sample_grid(p, 401))
    assert classify_coupling(s) is CouplingType.A
    assert relevant_constraints(s) == [0, 1]


def test_classification_needs_feasible_points():
    p = _ct("none", lambda f1, f2: np.column_stack([np.ones_like(f1), np.ones_like(f1)]), 5)
    with pytest.raises(ValueError, match="no feasible"):
        classify_coupling(label_fronts(sample_grid(p, 51)))


def test_set_invariants(labelled):
    for name, s in labelled.items():
        L = s.labels
        assert np.all(s.CV[L["CPF"]] == 0)
        cpf, upf = s.front("CPF"), s.front("UPF")
        weak = np.all(upf[:, None, :] <= cpf[None, :, :], axis=2).any(axis=0)
        assert weak.all(), name
        # every CPF point is either ICPF or within tolerance of some SCPF
        lo = cpf.min(axis=0)
        width = np.where(cpf.max(axis=0) > lo, cpf.max(axis=0) - lo, 1.0)
        z = (cpf - lo) / width
        near = np.zeros(len(cpf), dtype=bool)
        for i in range(s.n_con):
            scpf = (s.front(f"SCPF_{i + 1}") - lo) / width
            near |= cKDTree(scpf).query(z)[0] <= s.tol_match
        icpf = L["ICPF"][L["CPF"]]
        assert np.array_equal(icpf, ~near), name
        for i in range(s.n_con):
            rc = L[f"RCPF_{i + 1}"]
            if rc.any():
                assert np.all(s.C[rc, i] > 0)
                assert dominance_between(s.F[rc], s.front("ICPF")).any(axis=1).all()
            if not L["ICPF"].any():
                assert not rc.any()


def _hausdorff(A, B):
    return max(cKDTree(B).query(A)[0].max(), cKDTree(A).query(B)[0].max())


def test_refinement_stability(labelled):
    # one grid step in g moves both objectives by the step, i.e. sqrt(2) * step in objective space
    for name, coarse in labelled.items():
        tol = 2 * np.sqrt(2) * coarse.step
        fine = label_fronts(sample_grid(get_problem(name), 2001))
        for label in coarse.label_names():
            a, b = coarse.front(label), fine.front(label)
            assert (len(a) == 0) == (len(b) == 0), (name, label)
            if len(a):
                assert _hausdorff(a, b) < tol, (name, label)
        assert classify_coupling(fine) is classify_coupling(coarse)


def test_farthest_point_subsample(rng):
    P = rng.random((300, 2))
    S = farthest_point_subsample(P, 25)
    assert len(S) == 25
    assert np.array_equal(S, farthest_point_subsample(P[::-1], 25))
    assert set(map(tuple, S)) <= set(map(tuple, P))
    assert len(farthest_point_subsample(P[:10], 25)) == 10


def test_reference_front():
    ref = reference_front(get_problem("CT-D"))
    assert 900 <= len(ref) <= 1000
    assert nondominated_mask(ref).all()
    assert np.allclose(ref.sum(axis=1), 1.4)
