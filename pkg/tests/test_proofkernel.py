import itertools
from fractions import Fraction

import numpy as np
import pytest

from cycleagg.instances import Clause, CnfFormula
from cycleagg.oracles import enumerate_assignments, sphere_sample
from cycleagg.polyalg import Polynomial
from cycleagg.proofkernel import (POSITIVE, REAL, Compose, Const, Divide, Lemma, ModVariety, OddRadical, Product,
                                  SosCertificate, Square, Sum, check_proof, clause_polynomial,
                                  critical_point_relations, motzkin_certificate, robinson_certificate,
                                  sat_nonneg_encoding, sat_variables, verify_sos_certificate)

V1 = ("x",)
(X,) = Polynomial.gens(V1)
V3 = ("x", "y", "z")


def test_sum_of_square_and_constant():
    res = check_proof(Sum(Square(X), Const(Fraction(1), V1)))
    assert res.accepted and res.conclusion == X * X + 1 and res.strict


def test_nonpositive_constant_rejected():
    res = check_proof(Const(Fraction(0), V1))
    assert not res.accepted and isinstance(res.failing_node, Const)


def test_odd_radical_extracts_cube_root():
    res = check_proof(OddRadical(Square(X ** 3), 1))
    assert res.accepted and res.conclusion == X * X


def test_odd_radical_rejects_non_power():
    assert not check_proof(OddRadical(Sum(Square(X), Square(X + 1)), 1))


def test_divide():
    # (x^2+1)(x-1)^2 >= 0 and x^2+1 > 0 give (x-1)^2 >= 0
    f = Product(Sum(Square(X), Const(1, V1)), Square(X - 1))
    g = Sum(Square(X), Const(1, V1))
    res = check_proof(Divide(f, g))
    assert res.accepted and res.conclusion == (X - 1) ** 2


def test_divide_non_dividing_rejected():
    f = Square(X - 1)
    g = Sum(Square(X), Const(1, V1))
    res = check_proof(Divide(f, g))
    assert not res.accepted and "divide" in res.reason


def test_divide_needs_strict_divisor():
    assert not check_proof(Divide(Square(X * X), Square(X)))


def test_mod_variety_with_sphere():
    x, y, z = Polynomial.gens(V3)
    sphere = x * x + y * y + z * z - 1
    res = check_proof(ModVariety(Const(1, V3), x * x + y * y + z * z, (sphere,)))
    assert res.accepted and res.domain == "variety"
    assert not check_proof(ModVariety(Const(1, V3), x * x, (sphere,)))


def test_mod_variety_with_multipliers():
    x, y, z = Polynomial.gens(V3)
    g = x - y
    # x y - x^2 = (-x)(x - y)
    assert check_proof(ModVariety(Square(x), x * y, (g,), (-x,))).accepted
    assert not check_proof(ModVariety(Square(x), x * y, (g,), (x,))).accepted


def test_compose_lemma_length_counts_only_substitution():
    v = ("p", "q")
    p, q = Polynomial.gens(v)
    sub = {"a": p, "b": q, "c": p * p + q, "d": Polynomial.const(v, 3)}
    res = check_proof(Compose(Lemma("cauchy_schwarz_2"), sub, v))
    assert res.accepted
    assert res.length == 1 + 1 + sum(len(s.terms) for s in sub.values())
    a, b, c, d = sub["a"], sub["b"], sub["c"], sub["d"]
    assert res.conclusion == (a * a + b * b) * (c * c + d * d) - (a * c + b * d) ** 2


def test_compose_positive_lemma_needs_inner_proofs():
    v = ("u", "w")
    u, w = Polynomial.gens(v)
    sub = {"x": u * u, "y": w * w, "z": (u - w) ** 2}
    assert not check_proof(Compose(Lemma("am_gm_3"), sub, v, REAL))
    assert not check_proof(Compose(Lemma("am_gm_3"), sub, v, POSITIVE))
    proofs = (Square(u), Square(w), Square(u - w))
    res = check_proof(Compose(Lemma("am_gm_3"), sub, v, POSITIVE, proofs))
    assert res.accepted


def test_unknown_lemma():
    assert not check_proof(Lemma("nope"))


def random_tree(rng, depth, v):
    gens = Polynomial.gens(v)
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.3:
            return Const(Fraction(rng.integers(1, 5)), v)
        g = Polynomial.const(v, int(rng.integers(-3, 4)))
        for gen in gens:
            g = g + gen * int(rng.integers(-2, 3))
        return Square(g)
    kind = Sum if rng.random() < 0.6 else Product
    return kind(random_tree(rng, depth - 1, v), random_tree(rng, depth - 1, v))


def test_soundness_spot_check():
    rng = np.random.default_rng(3)
    v = ("a", "b")
    for _ in range(20):
        res = check_proof(random_tree(rng, 3, v))
        assert res.accepted
        pts = rng.normal(scale=3, size=(50, 2))
        assert all(res.conclusion.eval(tuple(p)) >= -1e-12 for p in pts)
        rat = [tuple(Fraction(int(t), 7) for t in rng.integers(-20, 20, 2)) for _ in range(20)]
        assert all(res.conclusion.eval(p) >= 0 for p in rat)


@pytest.mark.parametrize("make", [motzkin_certificate, robinson_certificate])
def test_certificates_accept_exact_and_numeric(make):
    cert = make()
    ex = verify_sos_certificate(cert, "exact")
    assert ex.accepted and ex.residual.is_zero()
    num = verify_sos_certificate(cert, "numeric", tol=1e-12, samples=1000, seed=1)
    assert num.accepted and num.samples == 1000


def test_certificate_weights_as_printed():
    assert [c for c, _ in motzkin_certificate().squares] == [Fraction(1, 4), 1, 1, 1, Fraction(3, 4)]
    assert [c for c, _ in robinson_certificate().squares] == [1, Fraction(3, 4), Fraction(1, 4), 1, 1]


def test_perturbed_motzkin_rejected():
    cert = motzkin_certificate()
    bad = cert.with_weight(0, Fraction(1, 4) + Fraction(1, 10))
    rep = verify_sos_certificate(bad)
    assert not rep.accepted and rep.residual_norm > 0
    assert not verify_sos_certificate(bad, "numeric").accepted


def test_certificate_json_round_trip(tmp_path):
    cert = robinson_certificate()
    path = tmp_path / "r.json"
    import json
    path.write_text(json.dumps(cert.to_json()))
    back = SosCertificate.load(path)
    assert back.f == cert.f and back.squares == cert.squares and back.relations == cert.relations


def test_nonpositive_weight_rejected():
    cert = motzkin_certificate()
    with pytest.raises(ValueError):
        cert.with_weight(1, 0)


def test_motzkin_nonnegative_on_sphere():
    f = motzkin_certificate().f
    pts = sphere_sample(3, 10_000, seed=4)
    x, y, z = pts.T
    vals = z ** 6 + x ** 4 * y ** 2 + x ** 2 * y ** 4 - 3 * x ** 2 * y ** 2 * z ** 2
    assert vals.min() >= -1e-12
    # the polynomial object agrees with the numpy expression
    assert float(f.eval(tuple(pts[0]))) == pytest.approx(vals[0], abs=1e-14)


def test_critical_relations_single_variable():
    rels = critical_point_relations(Polynomial.parse("x^2", ("x",)))
    v = ("x", "lam")
    assert rels == [Polynomial.parse("2x - lam x", v), Polynomial.parse("x^2 - 1", v)]


def test_critical_relations_count():
    assert len(critical_point_relations(motzkin_certificate().f)) == 4


def test_critical_relations_vanish_at_motzkin_critical_points():
    from scipy.optimize import minimize

    f = motzkin_certificate().f
    rels = critical_point_relations(f)
    rng = np.random.default_rng(0)
    fx = lambda p: float(f.eval(tuple(p / np.linalg.norm(p))))  # noqa: E731
    found = 0
    for start in rng.normal(size=(8, 3)):
        r = minimize(fx, start, method="BFGS", options={"gtol": 1e-14})
        p = r.x / np.linalg.norm(r.x)
        grad = np.array([float(f.diff(v).eval(tuple(p))) for v in ("x", "y", "z")])
        lam = float(grad @ p)  # the multiplier of a critical point on the sphere
        vals = [abs(float(g.eval((*p, lam)))) for g in rels]
        if max(vals) <= 1e-8:
            found += 1
    assert found >= 4


def test_clause_polynomial_case_table():
    v = sat_variables(3)
    for c in (Clause.of(1, -2, 3), Clause.of(-1, -2, -3), Clause.of(2, 3, 1)):
        p = clause_polynomial(c, v)
        zeros = 0
        for a in itertools.product((1, -1), repeat=3):
            val = p.eval(a)
            assert val in (0, 8)
            assert (val == 0) == c.satisfied_by(a)
            zeros += val == 0
        assert zeros == 7


def test_sat_encoding_minimum_matches_enumeration():
    for seed in range(5):
        f = CnfFormula.random(6, 30, seed=seed)
        poly = sat_nonneg_encoding(f)
        best = min(poly.eval(a) for a in itertools.product((1, -1), repeat=f.n))
        scan = enumerate_assignments(f)
        assert best == scan.min_f == 8 * scan.min_violated
        assert (best >= 8) == (not scan.satisfiable)
