import json

import pytest

from plantagents.catalog import (
    CatalogError,
    alias_url,
    bundled_catalog,
    canonical_url,
    load_catalog,
    registry_from_dict,
    render_manager_context,
    render_operator_context,
)

MODULE_IDS = [
    "inspection_module",
    "storage_module",
    "robotino_7",
    "cnc_module",
    "painting_module",
    "laser_module",
]

SKILL_CODES = ["I1", "I2", "I3", "S1", "S2", "T1", "T2", "M1", "M2", "M3", "P1", "P2", "L1"]


def test_bundled_catalog_shape(registry):
    assert [m.id for m in registry.modules] == MODULE_IDS
    assert [s.code for m in registry.modules for s in m.skills] == SKILL_CODES


def test_module_lookup(registry):
    mod = registry.module("cnc_module")
    assert mod.kind == "machining"
    assert registry.has_module("cnc_module")
    assert not registry.has_module("cnc")
    with pytest.raises(CatalogError, match="unknown module"):
        registry.module("drill_module")


def test_skill_lookup(registry):
    skill = registry.skill("M1")
    assert skill.feature == "drilled"
    assert registry.skill_host("M1").id == "cnc_module"
    with pytest.raises(CatalogError, match="unknown skill"):
        registry.skill("M9")


def test_storage_and_transport_roles(registry):
    assert registry.storage_module().id == "storage_module"
    assert registry.transport_module().id == "robotino_7"
    assert registry.storage_skill("retrieve").code == "S1"
    assert registry.storage_skill("store").code == "S2"
    assert registry.transport_skill().code == "T1"


def test_feature_provider(registry):
    mod, skill = registry.feature_provider("laser_pattern")
    assert (mod.id, skill.code) == ("laser_module", "L1")
    with pytest.raises(CatalogError):
        registry.feature_provider("welded")


def test_feature_kinds_unique(registry):
    kinds = [s.feature for m in registry.modules for s in m.skills if s.feature]
    assert len(kinds) == len(set(kinds))
    assert set(kinds) == {
        "raw_checked",
        "fault_checked",
        "quality_tested",
        "drilled",
        "milled",
        "polished",
        "coated",
        "paint_pattern",
        "laser_pattern",
    }


def test_module_by_phrase(registry):
    assert registry.module_by_phrase("laser machine").id == "laser_module"
    with pytest.raises(CatalogError):
        registry.module_by_phrase("welding")


def test_functionality_lookup(registry):
    fn = registry.functionality("robotino_7", "move_dock")
    assert fn.parameters == ("target_module",)
    fns = registry.module_functionalities("robotino_7")
    assert [f.name for f in fns] == ["move_dock", "load", "unload", "undock"]
    assert registry.module_functionalities("cnc_module") == ()


def test_known_endpoints_are_canonical(registry):
    urls = registry.known_endpoints()
    assert any("/functionalities/move_dock" in u for u in urls)
    assert not any("/functionality/" in u for u in urls)


def test_url_alias_roundtrip():
    plural = "http://h:1/robotino_7/functionalities/load"
    singular = "http://h:1/robotino_7/functionality/load"
    assert alias_url(plural) == singular
    assert canonical_url(singular) == plural
    assert canonical_url(plural) == plural
    assert alias_url(singular) == singular


def test_rebased_rewrites_host_only(registry):
    moved = registry.rebased("http://127.0.0.1:9999")
    fn = moved.functionality("robotino_7", "load")
    assert fn.url == "http://127.0.0.1:9999/robotino_7/functionalities/load"
    ep = moved.skill("M1").endpoint
    assert ep.startswith("http://127.0.0.1:9999/")
    assert ep.endswith("/cnc_module/skills/M1")
    # original untouched
    assert "129.69.102.129" in registry.skill("M1").endpoint


def test_rebased_preserves_prompt_template_urls(registry):
    moved = registry.rebased("http://127.0.0.1:7")
    assert "{url_move_dock}" in moved.prompts.transport_output_template


def _raw_catalog():
    from importlib import resources

    text = resources.files("plantagents.data").joinpath("catalog.json").read_text("utf-8")
    return json.loads(text)


def test_load_catalog_rejects_duplicate_skill(tmp_path):
    data = _raw_catalog()
    mod = data["modules"][0]
    mod["skills"].append(dict(mod["skills"][0]))
    p = tmp_path / "cat.json"
    p.write_text(json.dumps(data))
    with pytest.raises(CatalogError, match="duplicate skill code"):
        load_catalog(p)


def test_load_catalog_rejects_empty():
    with pytest.raises(CatalogError, match="no modules"):
        registry_from_dict({"modules": [], "prompts": _raw_catalog()["prompts"]})


def test_load_catalog_rejects_bad_kind():
    data = _raw_catalog()
    data["modules"][0]["kind"] = "warehouse"
    with pytest.raises(CatalogError, match="kind"):
        registry_from_dict(data)


def test_manager_context_numbering(registry):
    ctx = render_manager_context(registry)
    # nine rules, then the module list continues the numbering
    assert "(1) A production process" in ctx or ctx.startswith("(1)")
    assert "(10)" in ctx
    assert "(15)" in ctx
    assert "(16)" not in ctx
    for mod in registry.modules:
        assert mod.display in ctx


def test_manager_context_capability_nouns(registry):
    ctx = render_manager_context(registry)
    assert "capabilities: (M1)" in ctx
    assert "skills: (I1)" in ctx


def test_operator_context_lists_functionalities(registry):
    ctx = render_operator_context(registry, "robotino_7")
    for name in ("move_dock", "load", "unload", "undock"):
        assert f'Functionality "{name}"' in ctx
    assert "(1)" in ctx and "(4)" in ctx
    assert 'using the URL "http://' in ctx


def test_operator_context_requires_functionalities(registry):
    with pytest.raises(CatalogError):
        render_operator_context(registry, "cnc_module")


def test_bundled_catalog_caches_nothing_mutable():
    a = bundled_catalog()
    b = bundled_catalog()
    assert a.modules == b.modules
    assert a.prompts == b.prompts
