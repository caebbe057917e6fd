import math
from fractions import Fraction

import pytest

import msgflow as mf
from msgflow import MessageSpec, NoiseSpec, NonAffineError, SystemSpec, ValidationError
from msgflow.exprs import edge_in, msg, noise
from msgflow.graph import NodeRef, UnrolledGraph, edge


def test_sk_second_estimate_variance(sk_joint):
    assert sk_joint.variance(edge("B", 3, "A")) == Fraction(3, 2)


def test_identity_relay_covariance(sk_joint):
    assert sk_joint.covariance("M", edge("A", 0, "B")) == 1


def test_estimate_orthogonal_to_noise_difference(sk_joint):
    # Cov(second estimate, (Z1 - Z2)/2) = Cov(Mhat2, Mhat1 - Mhat2) = 0
    m1, m2 = edge("B", 1, "A"), edge("B", 3, "A")
    assert sk_joint.covariance(m2, m1) == sk_joint.variance(m2)


def test_information_about_message(sk_joint):
    m1, m2, m3 = edge("B", 1, "A"), edge("B", 3, "A"), edge("B", 5, "A")
    assert sk_joint.cmi(["M"], [m1, m2]) == pytest.approx(0.5 * math.log2(3), abs=1e-12)
    assert sk_joint.cmi(["M"], [m3]) == pytest.approx(1.0, abs=1e-12)
    assert sk_joint.cmi(["M"], []) == 0.0


def test_infinite_information_on_noiseless_copy(sk_joint):
    assert sk_joint.cmi(["M"], [edge("A", 0, "B")]) == math.inf
    # conditioned on a perfect copy, nothing more can be learned
    assert sk_joint.cmi(["M"], [edge("B", 1, "A")], [edge("A", 0, "A")]) == 0.0


def test_sk_sigma_parameter():
    fx = mf.build("sk", sigma2=Fraction(1, 2), iterations=2)
    g = mf.linear_propagate(fx.spec)
    m2 = edge("B", 3, "A")
    assert g.variance(m2) == 1 + Fraction(1, 2) / 4 * 2
    assert g.cmi(["M"], [m2]) == pytest.approx(0.5 * math.log2(1 + 4), abs=1e-12)


def test_scalar_restriction(sk_joint):
    with pytest.raises(ValidationError):
        sk_joint.cmi(["M", edge("A", 0, "B")], [edge("B", 1, "A")])


def test_non_affine_rejected():
    g = UnrolledGraph(("A",), 1)
    spec = SystemSpec(
        g,
        MessageSpec.gaussian("M", 1),
        noise={NodeRef("A", 0): NoiseSpec.gaussian(1)},
        functions={NodeRef("A", 0): {edge("A", 0, "A"): ("mul", msg(), noise())}},
        declared_inputs=("A",),
    )
    with pytest.raises(NonAffineError):
        mf.linear_propagate(spec)


def test_covariance_symmetric_psd_diagonal(sk_joint):
    n = len(sk_joint.variables)
    for i in range(n):
        assert sk_joint.cov[i][i] >= 0
        for j in range(n):
            assert sk_joint.cov[i][j] == sk_joint.cov[j][i]


def test_conditional_variance_monotone(sk_joint):
    m1, m2 = edge("B", 1, "A"), edge("B", 3, "A")
    v0 = sk_joint.cond_var("M")
    v1 = sk_joint.cond_var("M", [m1])
    v2 = sk_joint.cond_var("M", [m1, m2])
    assert v0 >= v1 >= v2
    assert v0 == 1
    assert v1 == Fraction(1, 2)
    assert v2 == Fraction(1, 3)


def test_singular_conditioning_exact():
    # Conditioning on a duplicated coordinate must not break the exact solve.
    fx = mf.build("sk", iterations=1)
    g = mf.linear_propagate(fx.spec)
    y1a, y1b = edge("A", 0, "B"), edge("A", 0, "A")  # both carry the message
    assert g.cond_var("M", [y1a, y1b]) == 0
    assert g.cmi(["M"], [edge("B", 1, "B")], [y1a, y1b]) == 0.0


def test_ordering_agrees_with_matched_discretization():
    # Affine chain: first hop is a perfect copy, second adds noise.  The
    # gaussian volumes and a small integer-alphabet analogue must order the
    # two hops the same way.
    g = UnrolledGraph(("A", "B"), 2, adjacency=[("A", "B"), ("B", "B")])
    gauss = SystemSpec(
        g,
        MessageSpec.gaussian("M", 1),
        noise={NodeRef("B", 1): NoiseSpec.gaussian(1)},
        functions={
            NodeRef("A", 0): {edge("A", 0, "B"): msg()},
            NodeRef("B", 1): {edge("B", 1, "B"): ("add", edge_in(edge("A", 0, "B")), noise())},
        },
        declared_inputs=("A",),
    )
    gj = mf.linear_propagate(gauss)
    disc = SystemSpec(
        g,
        MessageSpec.discrete(("M",), [((v,), Fraction(1, 3)) for v in (0, 1, 2)]),
        noise={NodeRef("B", 1): NoiseSpec.bernoulli()},
        functions=gauss.functions,
        declared_inputs=("A",),
    )
    dj = mf.enumerate_joint(disc)
    first, second = edge("A", 0, "B"), edge("B", 1, "B")
    f_gauss = (mf.quantified_flow(gj, first), mf.quantified_flow(gj, second))
    f_disc = (mf.quantified_flow(dj, first), mf.quantified_flow(dj, second))
    assert f_gauss[0] > f_gauss[1] > 0
    assert f_disc[0] > f_disc[1] > 0
