import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flexsynth import (FactoryRecipe, StructuralModel, compute_modes, load_model,
                       make_lumped_grid, make_point_set, mass_properties, plate_surrogate,
                       rigid_modes_geometric, save_model, triangle_body, two_mass_axial)
from flexsynth.errors import DimensionError, ModelError, ModelFileError
from flexsynth.factory import PLATE_I22, dumps_model, loads_model


def _minimal_doc():
    return {
        "format": "flexsynth-model", "version": 1, "units": "mm-Mg-s-N",
        "nodes": [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
        "mass": {"storage": "dense", "shape": [9, 9], "data": np.eye(9).ravel().tolist()},
        "stiffness": {"storage": "coo", "shape": [9, 9], "entries": []},
    }


def test_minimal_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(_minimal_doc()))
    model, basis = load_model(p)
    assert model.n_dofs == 9 and basis is None


def test_asymmetric_stiffness_names_worst_entry():
    doc = _minimal_doc()
    k = np.eye(9)
    k[2, 5] = 1.0
    k[5, 2] = 1.0 + 1e-3
    doc["stiffness"] = {"storage": "dense", "shape": [9, 9], "data": k.ravel().tolist()}
    with pytest.raises(ModelError, match=r"stiffness.*\(5, 2\)|stiffness.*\(2, 5\)"):
        loads_model(json.dumps(doc))


def test_parse_error_reports_position():
    text = json.dumps(_minimal_doc(), indent=1)
    bad = text.replace('"version": 1,', '"version": 1', 1)
    with pytest.raises(ModelFileError, match=r"line \d+, column \d+ \(offset \d+\)"):
        loads_model(bad)


def test_dimension_mismatch():
    doc = _minimal_doc()
    doc["mass"]["shape"] = [6, 6]
    with pytest.raises(DimensionError, match="mass"):
        loads_model(json.dumps(doc))


def test_wrong_format_and_units():
    doc = _minimal_doc()
    doc["units"] = "m-kg-s-N"
    with pytest.raises(ModelFileError, match="units"):
        loads_model(json.dumps(doc))
    doc["format"] = "other"
    with pytest.raises(ModelFileError):
        loads_model(json.dumps(doc))


@pytest.mark.parametrize("storage", ["dense", "coo"])
def test_round_trip(tmp_path, storage):
    model = triangle_body(k=3.0e5)
    basis = compute_modes(model, 2)
    p = tmp_path / "tri.json"
    save_model(model, p, basis, storage)
    text = p.read_text()
    back, back_basis = load_model(p)
    assert np.array_equal(back.stiffness_matrix, model.stiffness_matrix)
    assert np.array_equal(back.mass_matrix, model.mass_matrix)
    assert back.node_labels == model.node_labels
    assert np.allclose(back_basis.shapes, basis.shapes, atol=1e-14)
    # matrices survive byte for byte; modes are renormalized on load
    assert dumps_model(back, None, storage) == dumps_model(model, None, storage)
    assert json.loads(text)["modes"]["frequencies_hz"] == list(back_basis.frequencies)


def test_bad_modes_are_recomputed(tmp_path):
    model = triangle_body()
    basis = compute_modes(model, 1)
    doc = json.loads(dumps_model(model, basis))
    doc["modes"]["shapes"]["data"] = (2 * np.asarray(doc["modes"]["shapes"]["data"])).tolist()
    _, back = loads_model(json.dumps(doc))
    psi = back.shapes
    assert np.allclose(psi.T @ model.mass_matrix @ psi, np.eye(psi.shape[1]), atol=1e-10)


def test_two_mass_grid_frequency():
    m, k = 2e-3, 40.0
    basis = compute_modes(two_mass_axial(mass=m, k=k), 1)
    assert basis.frequencies[-1] == pytest.approx(np.sqrt(2 * k / m) / (2 * np.pi), rel=1e-10)


def test_grid_row_sums_vanish():
    model = plate_surrogate()
    k = model.stiffness_matrix
    for axis in range(3):
        assert np.max(np.abs(k[:, axis::3].sum(axis=1))) < 1e-9 * np.max(np.abs(k))


def test_calibrated_total_mass():
    model = plate_surrogate(counts=(5, 2, 2))
    total, _, _ = mass_properties(model)
    assert total == pytest.approx(0.0093, abs=1e-12)
    for name in ("P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8"):
        assert name in model.node_labels


def test_calibrated_inertia():
    _, com, inertia = mass_properties(plate_surrogate())
    assert abs(inertia[1, 1] - PLATE_I22) / PLATE_I22 < 0.05
    assert np.allclose(com, [0.0, 0.0, 5.0], atol=1e-12)


def test_mass_properties_examples():
    one = StructuralModel(np.zeros((1, 3)), np.eye(3), np.zeros((3, 3)))
    total, com, inertia = mass_properties(one)
    assert total == 1.0 and np.all(com == 0) and np.all(inertia == 0)
    pair = StructuralModel(np.array([[1.0, 0, 0], [-1.0, 0, 0]]), 0.5 * np.eye(6),
                           np.zeros((6, 6)))
    assert mass_properties(pair)[2][1, 1] == pytest.approx(1.0, abs=1e-15)


def test_disconnected_grid_rejected():
    recipe = FactoryRecipe(kind="point-set", coords=[(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)],
                           masses=[1, 1, 1, 1], springs=[(0, 1, 1.0)])
    with pytest.raises(ModelError, match="null space"):
        make_point_set(recipe)


def test_slender_grid_soft_mode_is_not_rigid():
    # lowest bending mode is about 1e-9 of the stiffest; rigid modes are at rounding level
    recipe = FactoryRecipe(counts=(2, 2, 2), dims=(1.0, 1.0, 835.0), distributed_mass=1.0,
                           spring_ea=100.0, point_masses=[(0, 0.0078125)])
    basis = compute_modes(make_lumped_grid(recipe), 1)
    assert basis.frequencies[6] > 0.0


def test_invalid_recipe():
    with pytest.raises(ModelError):
        make_lumped_grid(FactoryRecipe(counts=(1, 2, 2)))
    with pytest.raises(ModelError):
        make_point_set(FactoryRecipe(kind="point-set", coords=[(0, 0, 0)], masses=[-1.0]))


def _brute_force(model):
    m = np.diag(model.mass_matrix)[::3]
    total = sum(m)
    first = sum(mi * r for mi, r in zip(m, model.node_coords))
    com = first / total
    inertia = np.zeros((3, 3))
    for mi, r in zip(m, model.node_coords):
        d = r - com
        inertia += mi * (d @ d * np.eye(3) - np.outer(d, d))
    return total, com, inertia


recipes = st.builds(
    lambda counts, dims, mass, ea, extra: FactoryRecipe(
        counts=counts, dims=dims, distributed_mass=mass, spring_ea=ea,
        point_masses=[(0, extra)]),
    st.tuples(*[st.integers(2, 4)] * 3),
    st.tuples(*[st.floats(1.0, 1000.0)] * 3),
    st.floats(1e-4, 1.0),
    st.floats(1e2, 1e8),
    st.floats(1e-5, 1e-2),
)


@settings(max_examples=30, deadline=None)
@given(recipes)
def test_random_grids_are_valid_free_bodies(recipe):
    model = make_lumped_grid(recipe)
    total, com, inertia = mass_properties(model)
    t2, c2, i2 = _brute_force(model)
    assert total == pytest.approx(t2, rel=1e-10)
    assert np.allclose(com, c2, rtol=1e-10, atol=1e-10 * np.abs(model.node_coords).max())
    assert np.allclose(inertia, i2, rtol=1e-10, atol=1e-10 * np.abs(i2).max())
    psi = rigid_modes_geometric(model)
    k = model.stiffness_matrix
    assert np.max(np.abs(k @ psi)) < 1e-9 * np.max(np.abs(k)) * np.max(np.abs(psi))
