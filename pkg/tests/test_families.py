"""Tests for the family registry, parameter drawing and family verification."""
import json
import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from models.families import Family, FamilyRegistry
from pipeline.families import (
    build_family,
    check_family_instance,
    draw_family_params,
    list_families,
    load_registry,
    resolve_coefficients,
    verify_family,
)

_IDS = load_registry().ids


def _family(**overrides) -> dict:
    base = {
        "id": "tmp-family",
        "description": "test family",
        "setting": "trig",
        "free": ["a1", "b1"],
        "theta_a": ["a1", 0, 0, 0],
        "theta_b": ["b1", 0, 0, 0],
    }
    base.update(overrides)
    return base


def _write_registry(path: Path, families: list[dict]) -> Path:
    path.write_text(json.dumps({"version": 1, "families": families}), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

class TestRegistry:
    def test_bundled_ids(self):
        for expected in (
            [f"case1-item{k}" for k in range(1, 10)]
            + [f"case2b-b3-2sigma-item{k}" for k in range(1, 9)]
            + [f"case2b-a1-zero-item{k}" for k in range(1, 16)]
            + ["case2b-symmetric", "laurent", "projection"]
        ):
            assert expected in _IDS

    def test_ids_sorted_naturally(self):
        ones = [i for i in _IDS if i.startswith("case1-")]
        assert ones == [f"case1-item{k}" for k in range(1, 10)]
        zeros = [i for i in _IDS if i.startswith("case2b-a1-zero-")]
        assert zeros[-2:] == ["case2b-a1-zero-item14", "case2b-a1-zero-item15"]

    def test_unknown_id(self):
        with pytest.raises(ValueError, match="unknown family id"):
            load_registry().get("case9-item1")

    def test_load_from_file(self, tmp_settings):
        path = _write_registry(tmp_settings.families_path, [_family()])
        registry = FamilyRegistry.load(path)
        assert registry.ids == ["tmp-family"]
        assert registry.get("tmp-family").claims == ["relation"]

    def test_duplicate_ids_rejected(self, tmp_path):
        path = _write_registry(tmp_path / "families.json", [_family(), _family()])
        with pytest.raises(ValidationError, match="duplicate"):
            FamilyRegistry.load(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "families.json"
        path.write_text(json.dumps({"version": 2, "families": []}), encoding="utf-8")
        with pytest.raises(ValidationError):
            FamilyRegistry.load(path)


class TestFamilyValidation:
    def test_id_must_be_slug(self):
        with pytest.raises(ValidationError, match="slug"):
            Family.model_validate(_family(id="Case_1"))

    def test_unknown_name_in_expression(self):
        with pytest.raises(ValidationError, match="unknown names"):
            Family.model_validate(_family(theta_b=["zeta", 0, 0, 0]))

    def test_coefficient_count_per_setting(self):
        with pytest.raises(ValidationError, match="theta_a"):
            Family.model_validate(_family(theta_a=["a1", 0, 0]))

    def test_sigma_mode_only_for_trig(self):
        with pytest.raises(ValidationError, match="sigma mode"):
            Family.model_validate(_family(setting="case1", sigma="zero-sigma1"))

    def test_unknown_claim(self):
        with pytest.raises(ValidationError):
            Family.model_validate(_family(claims=["relation", "ab_is_nice"]))

    def test_extra_fields_forbidden(self):
        with pytest.raises(ValidationError):
            Family.model_validate(_family(note="extra"))


# ---------------------------------------------------------------------------
# Drawing and resolution
# ---------------------------------------------------------------------------

class TestDrawing:
    def test_same_seed_same_draw(self):
        family = load_registry().get("case2a-item6-sub1")
        first = draw_family_params(family, np.random.default_rng(7))
        second = draw_family_params(family, np.random.default_rng(7))
        assert first == second

    def test_free_parameters_in_range(self):
        family = load_registry().get("case1-item5")
        values = draw_family_params(family, np.random.default_rng(0))
        for name in family.free:
            assert 0.5 <= abs(values[name]) <= 2.0
        assert values["sigma1"] == values["sigma2"] == 0.5

    def test_avoid_constraints_respected(self):
        family = load_registry().get("case2a-item6-sub1")
        for seed in range(20):
            values = draw_family_params(family, np.random.default_rng(seed))
            assert abs(values["delta"] * values["sigma2"] * values["a2"] - 1.0) >= 0.1
            assert abs(values["delta"] * values["sigma2"] * values["a2"] + 1.0) >= 0.1

    def test_overrides_are_kept(self):
        family = load_registry().get("laurent")
        values = draw_family_params(family, np.random.default_rng(0), {"ga2": 1.25, "delta": -0.5})
        assert values["ga2"] == 1.25
        assert values["delta"] == -0.5

    def test_delta_modes(self):
        registry = load_registry()
        assert draw_family_params(registry.get("case2a-item3-sub2"), np.random.default_rng(0))["delta"] == 0.0
        assert draw_family_params(registry.get("projection"), np.random.default_rng(0))["delta"] == 1.0

    def test_sigma_modes(self):
        registry = load_registry()
        rng = np.random.default_rng(1)
        assert draw_family_params(registry.get("case2a-item1-sub1"), rng)["sigma1"] == 0.0
        both = draw_family_params(registry.get("case2a-item2-sub1"), rng)
        assert both["sigma1"] == both["sigma2"] == 0.0
        assert draw_family_params(registry.get("case2a-item2-sub2"), rng)["sigma2"] == 0.0

    def test_resolution_follows_dependencies(self):
        family = load_registry().get("case2a-item5-sub2")
        values = {"a1": 1.5, "b2": 0.5, "b3": -1.0, "delta": 2.0, "sigma1": 0.25, "sigma2": 0.75}
        coefficients = resolve_coefficients(family, values)
        assert coefficients["a2"] == pytest.approx(1.0 / 1.5)
        assert coefficients["b1"] == pytest.approx(2.0 * 1.5 * (0.75 * 0.5 + 0.25))
        assert coefficients["b4"] == 0.0

    def test_cyclic_coefficients(self):
        family = Family.model_validate(_family(free=[], theta_a=["b1", 0, 0, 0], theta_b=["a1", 0, 0, 0]))
        with pytest.raises(ValueError, match="depend on each other"):
            resolve_coefficients(family, {"delta": 1.0, "sigma1": 0.5, "sigma2": 0.5})

    def test_unsatisfiable_family(self):
        family = Family.model_validate(_family(avoid=["0*a1"]))
        with pytest.raises(ValueError, match="no admissible parameters"):
            draw_family_params(family, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family_id", _IDS)
def test_every_family_verifies(family_id):
    for seed in range(5):
        report = verify_family(family_id, seed=seed)
        assert report.passed, (family_id, seed, report.identities)
        assert report.family_id == family_id


class TestVerifyFamily:
    def test_unknown_family(self):
        with pytest.raises(ValueError):
            verify_family("not-a-family")

    def test_claims_become_identities(self):
        report = verify_family("case1-item3", seed=2)
        assert report.identities["ab_eq_ba"]
        assert "commutator_norm" in report.details

    def test_laurent_commutes_iff_product_zero(self):
        commuting = verify_family("laurent", params={"ga2": 1.0, "gb2": 0.0})
        assert commuting.identities["commute_iff"]
        assert commuting.details["commutes"] == 1.0
        generic = verify_family("laurent", params={"ga2": 1.0, "gb2": 2.0})
        assert generic.identities["commute_iff"]
        assert generic.details["commutes"] == 0.0

    def test_projection_with_given_mu(self):
        report = verify_family("projection", params={"mu": 2.5})
        assert report.passed
        assert report.identities == {"ab_eq_ba": True, "a_idempotent": True}

    def test_coefficient_model(self):
        family = load_registry().get("case2a-item2-sub2")
        inst = build_family(family, draw_family_params(family, np.random.default_rng(3)))
        assert inst.is_coefficient_model
        report = check_family_instance(inst)
        assert report.method == "coefficient_model"
        assert report.holds

    def test_broken_instance_fails(self):
        family = load_registry().get("case1-item3")
        values = draw_family_params(family, np.random.default_rng(0))
        inst = build_family(family, values)
        inst.A = inst.A.with_matrix(inst.A.matrix + np.diag([0.0, 0.0, 0.3, 0.0]))
        report = check_family_instance(inst)
        assert not report.holds
        assert not report.passed

    def test_case1_geometry(self):
        family = load_registry().get("case1-item1")
        inst = build_family(family, draw_family_params(family, np.random.default_rng(0), {"shift": 0.25}))
        assert inst.A.domain.lo == 0.25
        assert math.isclose(inst.A.domain.hi, 1.25)


def test_list_families():
    rows = list_families()
    assert [r[0] for r in rows] == _IDS
    assert all(description for _, description in rows)
