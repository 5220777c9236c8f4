import math
import os
import pathlib

import pytest

import dynkit

CONFIGS = pathlib.Path(os.environ.get("DYNKIT_CONFIGS", pathlib.Path(__file__).parents[2] / "configs"))


def test_cat_map_values():
    cat = dynkit.make_map("cat")
    x, y = cat([0.3, 0.6])
    assert x == pytest.approx(0.2)
    assert y == pytest.approx(0.9)
    back = cat(cat([0.3, 0.6]), dynkit.Direction.inverse)
    assert back == pytest.approx([0.3, 0.6])
    assert dynkit.volume_check(cat)["pass"]


def test_cat_is_chain_transitive():
    cat = dynkit.make_map("cat")
    grid = dynkit.Grid(cat.domain, [5, 5])
    g = dynkit.build_graph(grid, cat, grid.box_diameter)
    cr = dynkit.chain_recurrent_boxes(g)
    assert cr.count() == grid.box_count == 1024
    assert dynkit.is_chain_transitive(g)
    assert len(dynkit.chain_components(g)) == 1


def test_contraction_attractor_and_conley():
    f = dynkit.make_map("contraction", {"c": 0.5}, lower=[-1.0], upper=[1.0])
    grid = dynkit.Grid(f.domain, [6])
    g = dynkit.build_graph(grid, f, grid.box_width[0])
    recs = dynkit.attractors(g)
    assert recs
    for r in recs:
        assert grid.box_of_point([0.0]) in r.attractor
        assert r.attractor.subset_of(r.block)
        assert r.block.subset_of(r.basin)
    assert dynkit.conley_check(g)["holds"]


def test_translation_pullback():
    t = dynkit.make_map("translation")
    grid = dynkit.Grid(t.domain, [6, 6])
    a = dynkit.attractor_from_region(t, grid, lambda p: p[0] >= 0 or p[1] < -1.0 / p[0], 1000, 2)
    g = dynkit.build_graph(grid, t, grid.box_diameter)
    assert dynkit.chain_recurrent_boxes(g).count() == 0
    assert a.count() == 64 * 33


def test_shadowing_cat():
    cat = dynkit.make_map("cat")
    pts = dynkit.random_pseudo_orbit(cat, [0.2, 0.7], 1e-4, 60, seed=4)
    r = dynkit.shadow(cat, pts, 1e-4, 1e-2, 1e-3)
    assert r.shadowed
    assert r.achieved_eps <= 1e-2


def test_manifolds_and_homoclinic_points():
    cat = dynkit.make_map("cat")
    hp = dynkit.classify_periodic_point(cat, [0.0, 0.0])
    assert hp.is_hyperbolic
    phi = (1 + math.sqrt(5)) / 2
    assert abs(hp.eigenvalues[0]) == pytest.approx(phi**2)
    wu = dynkit.grow_manifold(cat, hp, dynkit.ManifoldSide.unstable, 3.0)
    ws = dynkit.grow_manifold(cat, hp, dynkit.ManifoldSide.stable, 3.0)
    assert wu.length >= 3.0
    hits = dynkit.homoclinic_points(wu, ws)
    assert hits
    assert all(dynkit.homoclinic_membership(cat, hp, h) for h in hits)


def test_errors_raise():
    with pytest.raises(ValueError):
        dynkit.make_map("no-such-map")
    with pytest.raises(ValueError):
        dynkit.Grid(dynkit.Domain.unit_torus(2), [13, 2])


def test_run_cli_config(tmp_path):
    import json

    config = json.loads((CONFIGS / "cat.json").read_text())
    config["grid"]["depth"] = 4
    code, report = dynkit.run("cr", config, tmp_path / "out", seed=3)
    assert code == 0
    assert report["results"]["cr"]["chain_recurrent_fraction"] == 1.0
    assert report["config"]["rng_seed"] == 3
    assert (tmp_path / "out" / "report.json").exists()
