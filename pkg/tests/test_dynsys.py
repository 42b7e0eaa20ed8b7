import numpy as np
import pytest

from opdyn.bias import Intergroup
from opdyn.demos import EXAMPLE1_EDGES, EXAMPLE1_INITIAL
from opdyn.dynamics import OpinionModel, simulate
from opdyn.dynsys import (
    MapDescriptor,
    Orbit,
    constant_map,
    iterate_orbit,
    logistic_map,
    omega_limit_estimate,
    opinion_map,
    parity_split,
    resolve_map,
    write_orbit_csv,
)
from opdyn.graph import new_influence_graph

# closed-form period-2 points of mu x (1 - x): ((mu + 1) -/+ sqrt((mu + 1)(mu - 3))) / (2 mu)
MU = 3.4
P_LOW = ((MU + 1) - np.sqrt((MU + 1) * (MU - 3))) / (2 * MU)
P_HIGH = ((MU + 1) + np.sqrt((MU + 1) * (MU - 3))) / (2 * MU)


def test_logistic_values():
    assert logistic_map(3.4)(0.3) == pytest.approx(0.714, abs=1e-15)
    assert logistic_map(3.4)(0.5) == pytest.approx(0.85, abs=1e-15)
    assert logistic_map(0.0)(0.77) == 0.0
    assert logistic_map(4.0)(0.5) == 1.0
    with pytest.raises(ValueError):
        logistic_map(4.5)
    with pytest.raises(ValueError):
        logistic_map(-0.1)


def test_orbit_basics():
    f = logistic_map(3.4)
    assert iterate_orbit(f, 0.3, 0).points == [0.3]
    orb = iterate_orbit(f, 0.3, 1)
    assert orb.points[1] == pytest.approx(0.714)
    assert orb.map_id.startswith("logistic")
    with pytest.raises(ValueError):
        iterate_orbit(f, 0.3, -1)


def test_unknown_map():
    with pytest.raises(KeyError):
        resolve_map("henon", a=1.4)
    with pytest.raises(TypeError):
        iterate_orbit(lambda x: x, 0.1, 3)
    assert resolve_map("logistic", mu=2.0)(0.5) == 0.5


@pytest.mark.parametrize("f", [logistic_map(3.4), logistic_map(3.9), constant_map(0.25),
                               MapDescriptor("cube", lambda x: x ** 3)])
def test_semigroup_law(f):
    rng = np.random.default_rng(3)
    for _ in range(30):
        s, t = (int(v) for v in rng.integers(0, 51, 2))
        x0 = float(rng.random())
        two_stage = iterate_orbit(f, iterate_orbit(f, x0, s).points[-1], t).points[-1]
        assert two_stage == iterate_orbit(f, x0, s + t).points[-1]


def test_logistic_keeps_unit_interval():
    rng = np.random.default_rng(9)
    mus = rng.uniform(0, 4, 10_000)
    x = rng.random(10_000)
    for _ in range(50):
        x = mus * x * (1 - x)
        assert np.all((x >= 0) & (x <= 1))
    for mu, x0 in zip(mus[:200], rng.random(200)):
        pts = iterate_orbit(logistic_map(float(mu)), float(x0), 30).points
        assert all(0.0 <= p <= 1.0 for p in pts)


def test_logistic_omega_limit_period_two():
    f = logistic_map(MU)
    orb = iterate_orbit(f, 0.3, 2000)
    est = omega_limit_estimate(orb, burn_in=1000, cluster_tol=1e-3)
    lo, hi = sorted(est.accumulation_points)
    assert len(est.accumulation_points) == 2
    assert lo == pytest.approx(0.4519, abs=1e-3) and hi == pytest.approx(0.8421, abs=1e-3)
    assert lo == pytest.approx(P_LOW, abs=1e-9) and hi == pytest.approx(P_HIGH, abs=1e-9)
    assert abs(f(lo) - hi) <= 1e-6 and abs(f(hi) - lo) <= 1e-6
    assert sum(est.support) == 1001


def test_parity_split():
    orb = iterate_orbit(logistic_map(MU), 0.3, 2000)
    rep = parity_split(orb, 1000)
    assert rep["even"] == [pytest.approx(P_LOW, abs=1e-9)]
    assert rep["odd"] == [pytest.approx(P_HIGH, abs=1e-9)]


def test_constant_map_single_point():
    orb = iterate_orbit(constant_map(0.3), 0.9, 20)
    assert omega_limit_estimate(orb).accumulation_points == [pytest.approx(0.3, abs=1e-15)]


def test_omega_limit_arguments():
    orb = Orbit([0.1, 0.2], "x")
    with pytest.raises(ValueError):
        omega_limit_estimate(orb, burn_in=2)
    with pytest.raises(ValueError):
        omega_limit_estimate(orb, burn_in=0, cluster_tol=0)


def test_min_support_drops_transients():
    orb = Orbit([0.9, 0.5, 0.5, 0.5, 0.5], "x")
    assert len(omega_limit_estimate(orb, 0, 1e-3).accumulation_points) == 2
    assert omega_limit_estimate(orb, 0, 1e-3, min_support=2).accumulation_points == [0.5]


def test_opinion_orbit_equals_simulation():
    g = new_influence_graph(6, EXAMPLE1_EDGES)
    model = OpinionModel(g, EXAMPLE1_INITIAL, Intergroup())
    tr = simulate(model, horizon=300)
    orb = iterate_orbit(opinion_map(g, Intergroup()), np.array(EXAMPLE1_INITIAL), len(tr.states) - 1)
    np.testing.assert_array_equal(np.array(orb.points), tr.states)


def test_opinion_orbit_omega_limits():
    # as drawn: a persistent 2-cycle, not a consensus point
    g = new_influence_graph(6, EXAMPLE1_EDGES)
    orb = iterate_orbit(opinion_map(g, Intergroup()), np.array(EXAMPLE1_INITIAL), 4000)
    pts = omega_limit_estimate(orb, burn_in=2000).accumulation_points
    assert len(pts) == 2
    assert all(np.ptp(p) > 0.05 for p in pts)
    # with the arrows reversed the orbit collapses to the consensus vector
    gt = new_influence_graph(6, [(d, s, w) for s, d, w in EXAMPLE1_EDGES])
    orb = iterate_orbit(opinion_map(gt, Intergroup()), np.array(EXAMPLE1_INITIAL), 400)
    (p,) = omega_limit_estimate(orb, burn_in=200).accumulation_points
    np.testing.assert_allclose(p, np.full(6, 0.46046154663816413), atol=1e-9)


def test_orbit_csv(tmp_path):
    path = tmp_path / "orbit.csv"
    write_orbit_csv(iterate_orbit(logistic_map(MU), 0.3, 3), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,value"
    assert lines[2] == "1,0.71399999999999997"
    vec = tmp_path / "vec.csv"
    write_orbit_csv(Orbit([np.array([0.1, 0.2])], "v"), vec)
    assert vec.read_text().splitlines()[0] == "t,value_1,value_2"
