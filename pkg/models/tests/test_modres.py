"""test_modres.py"""

# pylint: disable=all

from pathlib import Path

import pytest

from models import modres
from models.fixtures import load_fixture
from models.groebner import Ideal
from models.modres import (
    AffineRing,
    ModulePresentation,
    annihilator,
    clear_resolutions,
    ext_module,
    fitting_ideal,
    free_resolution,
    hom_module,
    kernel_modulo,
    prune_presentation,
    quotient_module,
    span_contains,
    syzygy_module,
    verify_exactness,
)
from models.qpoly import parse_many, parse_polynomial

XY = ["x", "y"]
REPO_FIXTURE_DIR = Path(__file__).resolve().parent.parent.parent / "fixtures"


def P(text, variables=XY):
    return parse_polynomial(text, variables)


@pytest.fixture
def S():
    return AffineRing.polynomial(XY, "S")


@pytest.fixture
def node():
    return AffineRing(XY, [P("x*y")], name="node")


def cyclic(ring, *gens):
    return ModulePresentation.cyclic(ring, parse_many(gens, ring.variables))


def test_ring_invariants(S, node):
    assert S.dim == 2 and S.is_polynomial_ring and S.domain_certified
    assert node.dim == 1 and node.is_complete_intersection and node.gorenstein_certified
    assert not node.domain_certified
    planes = AffineRing(["x", "y", "u", "v"], parse_many(["x*u", "x*v", "y*u", "y*v"],
                                                          ["x", "y", "u", "v"]))
    assert planes.dim == 2 and not planes.is_complete_intersection
    assert AffineRing(XY, [P("1")]).is_zero_ring


def test_ring_reduce_and_quotient(node):
    assert node.reduce(P("x^2*y + x")) == P("x")
    assert node.parse("x*y + 1") == P("1")
    line = node.quotient(Ideal([P("y")], XY))
    assert line.relations == Ideal([P("y")], XY)
    ext = node.polynomial_extension()
    assert ext.variables == ("x", "y", "t") and ext.dim == 2


def test_presentation_cleans_columns(node):
    M = ModulePresentation(node, 1, ((P("x*y"),), (P("x"),), (P("x"),)))
    assert M.columns == ((P("x"),),)
    with pytest.raises(ValueError):
        ModulePresentation(node, 2, ((P("x"),),))


def test_zero_module_and_direct_sum(S):
    assert ModulePresentation.zero_module(S).is_zero()
    assert cyclic(S, "1").is_zero()
    assert not cyclic(S, "x").is_zero()
    M = cyclic(S, "x").direct_sum(cyclic(S, "y"))
    assert M.generators == 2 and len(M.columns) == 2


def test_kernel_and_span(S):
    cols = [(P("x"),), (P("y"),)]
    kernel = kernel_modulo(S, cols, 1)
    assert len(kernel) == 1
    a, b = kernel[0]
    assert (P("x") * a + P("y") * b).is_zero()
    assert span_contains(S, cols, 1, (P("x*y + y^2"),))
    assert not span_contains(S, cols, 1, (P("1"),))


def test_prune_presentation(S):
    M = ModulePresentation(S, 2, ((P("1"), P("x")), (P("0"), P("y"))))
    pruned = prune_presentation(M)
    assert pruned.generators == 1
    assert annihilator(pruned) == Ideal([P("y")], XY)


def test_fitting_ideals(S, node):
    M = cyclic(S, "x").direct_sum(cyclic(S, "y"))
    assert fitting_ideal(M, 0) == Ideal([P("x*y")], XY)
    assert fitting_ideal(M, 1) == Ideal([P("x"), P("y")], XY)
    assert fitting_ideal(M, 2).is_unit()
    free = ModulePresentation.free(S, 2)
    assert fitting_ideal(free, 1).is_zero()
    same = ModulePresentation(node, 2, ((P("x"), P("0")), (P("0"), P("1"))))
    assert fitting_ideal(same, 0) == fitting_ideal(cyclic(node, "x"), 0)


def test_annihilator(S, node):
    M = cyclic(S, "x").direct_sum(cyclic(S, "y"))
    assert annihilator(M) == Ideal([P("x*y")], XY)
    assert annihilator(cyclic(node, "x")) == Ideal([P("x")], XY)
    assert annihilator(ModulePresentation.zero_module(S)).is_unit()


def test_koszul_resolution(S):
    K = cyclic(S, "x", "y")
    res = free_resolution(K)
    assert res.ranks == (1, 2, 1)
    assert res.status == "complete" and res.projective_dimension == 2
    assert verify_exactness(res)


def test_periodic_resolution_over_node(node):
    res = free_resolution(cyclic(node, "x"), 5)
    assert res.ranks == (1, 1, 1, 1, 1, 1)
    assert res.status == "infinite-or-unknown-pd"
    assert res.projective_dimension is None
    assert verify_exactness(res)


def test_resolution_rejects_negative_length(S):
    with pytest.raises(ValueError):
        free_resolution(cyclic(S, "x"), -1)


def test_syzygy_module(node):
    omega = syzygy_module(cyclic(node, "x"), 1)
    assert omega.generators == 1
    assert annihilator(omega) == Ideal([P("y")], XY)


def test_ext_over_polynomial_ring(S):
    K = cyclic(S, "x", "y")
    R = ModulePresentation.free(S, 1)
    assert prune_presentation(ext_module(K, R, 0)).generators == 0
    assert prune_presentation(ext_module(K, R, 1)).generators == 0
    top = prune_presentation(ext_module(K, R, 2))
    assert top.generators == 1
    assert annihilator(top) == Ideal([P("x"), P("y")], XY)


def test_ext_over_node(node):
    Mx, My = cyclic(node, "x"), cyclic(node, "y")
    R = ModulePresentation.free(node, 1)
    assert prune_presentation(ext_module(Mx, R, 1)).generators == 0
    assert annihilator(hom_module(Mx, R)) == Ideal([P("x")], XY)
    assert annihilator(ext_module(Mx, My, 1)) == Ideal([P("x"), P("y")], XY)


def test_ext_index_and_ring_checks(S, node):
    with pytest.raises(ValueError):
        ext_module(cyclic(S, "x"), cyclic(S, "y"), -1)
    with pytest.raises(ValueError):
        ext_module(cyclic(S, "x"), cyclic(node, "y"), 0)


def test_quotient_module(node):
    M = ModulePresentation.free(node, 1)
    Q = quotient_module(M, Ideal([P("x")], XY))
    assert Q.ring.relations == Ideal([P("x")], XY)
    assert Q.generators == 1 and not Q.is_zero()


def _fixture_modules():
    return [
        (path.stem, module)
        for path in sorted(REPO_FIXTURE_DIR.glob("*.fix"))
        for module in sorted(load_fixture(path).modules)
    ]


@pytest.mark.parametrize("name, module", _fixture_modules())
def test_fixture_resolutions_are_exact(repo_fixture, name, module):
    M = repo_fixture(name).module(module)
    res = free_resolution(M, 3)
    for k in range(1, res.length + 1):
        assert all(len(col) == res.rank(k - 1) for col in res.differential(k))
        assert len(res.differential(k)) == res.rank(k)
    assert verify_exactness(res)


@pytest.mark.parametrize("name, module", _fixture_modules())
def test_annihilator_kills_ext(repo_fixture, name, module):
    fx = repo_fixture(name)
    M = fx.module(module)
    R = ModulePresentation.free(fx.ring, 1)
    ann = annihilator(M)
    for i in range(3):
        assert annihilator(ext_module(M, R, i)).contains_ideal(ann)


def test_resolution_prefix_is_reused(S):
    clear_resolutions()
    K = cyclic(S, "x", "y")
    short = free_resolution(K, 1)
    assert short.ranks == (1, 2) and short.status == "infinite-or-unknown-pd"
    assert free_resolution(K).ranks == (1, 2, 1)
    assert free_resolution(K, 1).ranks == (1, 2)
    clear_resolutions()


def test_resolution_cache_is_bounded(S, monkeypatch):
    clear_resolutions()
    monkeypatch.setattr(modres, "RES_CACHE_SIZE", 2)
    for g in ("x", "y", "x + y", "x - y"):
        assert free_resolution(cyclic(S, g)).ranks == (1, 1)
    assert len(modres._RES_STATE) == 2
    clear_resolutions()
