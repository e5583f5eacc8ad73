"""Digital-twin catalog of the production plant.

The catalog is a machine-readable description of every production module:
its skills, its components, and the functionalities those components expose
as HTTP services.  Everything the agents are told about the plant is
rendered from this registry, so adding a module is a data change, not a
code change.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

# Module kinds with semantics the plant understands.
MODULE_KINDS = ("storage", "inspection", "machining", "painting", "laser", "transport")

# Storage skills must declare which side of the inventory they drive.
STORAGE_ROLES = ("retrieve", "store")


class CatalogError(Exception):
    """The catalog file is malformed or violates a registry invariant."""


@dataclass(frozen=True)
class Functionality:
    """A single HTTP-invokable primitive of a module component."""

    name: str
    description: str
    url: str
    parameters: tuple[str, ...] = ()


@dataclass(frozen=True)
class Component:
    id: str
    name: str
    functionalities: tuple[Functionality, ...] = ()


@dataclass(frozen=True)
class Skill:
    """An offered capability of a module, invokable at ``endpoint``.

    ``feature`` names the workpiece feature the skill applies (production
    and inspection skills).  ``role`` marks storage skills as the retrieve
    or store side.  Transport skills carry neither.
    """

    code: str
    description: str
    endpoint: str
    feature: str | None = None
    role: str | None = None


@dataclass(frozen=True)
class Module:
    id: str
    name: str
    kind: str
    # How the module is announced in the manager context, e.g. "An inspection
    # module".  The capability noun lets a module say "capabilities" instead
    # of "skills" without special-casing the renderer.
    display: str
    capability_noun: str
    # Short phrase used in transport demands ("... from the storage module").
    transport_phrase: str | None
    skills: tuple[Skill, ...]
    components: tuple[Component, ...] = ()
    # Extra context paragraphs shown before the functionality list in the
    # operator prompt (only meaningful for modules with functionalities).
    operator_preamble: tuple[str, ...] = ()
    # Technical metadata carried along but never rendered into prompts.
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PromptExample:
    """A verified input/output pair shown in the Examples section."""

    input: str
    output: str


@dataclass(frozen=True)
class TransportExample:
    """Worked operator example, stored as endpoints into the shared template."""

    input: str
    start_module: str
    target_module: str


@dataclass(frozen=True)
class PromptAssets:
    """Fixed prompt text blocks that belong to the plant description."""

    manager_role_goal: str
    manager_rules: tuple[str, ...]
    manager_modules_intro: str
    manager_instructions: str
    manager_examples: tuple[PromptExample, ...]
    operator_role_goal: str
    operator_instructions: str
    operator_examples: tuple[TransportExample, ...]
    # Template for a canonical transport step sequence.  Placeholders:
    # {start}, {target} (module phrases) and {url_<functionality>}.
    transport_output_template: str
    # Template for the transport demand handed to the operator agent.
    transport_demand_template: str


@dataclass
class Registry:
    """Loaded, validated catalog with lookup helpers.

    Treat instances as read-only; derive changed copies via :meth:`rebased`.
    """

    modules: tuple[Module, ...]
    prompts: PromptAssets
    _skills: dict[str, tuple[Module, Skill]] = field(init=False, repr=False)
    _modules: dict[str, Module] = field(init=False, repr=False)
    _phrases: dict[str, Module] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._modules = {m.id: m for m in self.modules}
        self._skills = {
            s.code: (m, s) for m in self.modules for s in m.skills
        }
        self._phrases = {
            m.transport_phrase: m
            for m in self.modules
            if m.transport_phrase is not None
        }

    # -- lookups ---------------------------------------------------------

    def module(self, module_id: str) -> Module:
        try:
            return self._modules[module_id]
        except KeyError:
            raise CatalogError(f"unknown module id: {module_id!r}") from None

    def has_module(self, module_id: str) -> bool:
        return module_id in self._modules

    def skill(self, code: str) -> Skill:
        return self._skill_entry(code)[1]

    def skill_host(self, code: str) -> Module:
        return self._skill_entry(code)[0]

    def has_skill(self, code: str) -> bool:
        return code in self._skills

    def _skill_entry(self, code: str) -> tuple[Module, Skill]:
        try:
            return self._skills[code]
        except KeyError:
            raise CatalogError(f"unknown skill code: {code!r}") from None

    def module_by_phrase(self, phrase: str) -> Module:
        try:
            return self._phrases[phrase]
        except KeyError:
            raise CatalogError(f"no module with transport phrase {phrase!r}") from None

    def storage_module(self) -> Module:
        return self._single_kind("storage")

    def transport_module(self) -> Module:
        return self._single_kind("transport")

    def _single_kind(self, kind: str) -> Module:
        found = [m for m in self.modules if m.kind == kind]
        if not found:
            raise CatalogError(f"catalog has no {kind} module")
        return found[0]

    def storage_skill(self, role: str) -> Skill:
        for s in self.storage_module().skills:
            if s.role == role:
                return s
        raise CatalogError(f"storage module has no {role!r} skill")

    def transport_skill(self) -> Skill:
        """The inter-module transport skill (first one the robot offers)."""
        robot = self.transport_module()
        for s in robot.skills:
            if s.feature is None and s.role is None:
                return s
        raise CatalogError("transport module offers no transport skill")

    def functionality(self, module_id: str, name: str) -> Functionality:
        mod = self.module(module_id)
        for comp in mod.components:
            for fn in comp.functionalities:
                if fn.name == name:
                    return fn
        raise CatalogError(f"module {module_id!r} has no functionality {name!r}")

    def module_functionalities(self, module_id: str) -> tuple[Functionality, ...]:
        mod = self.module(module_id)
        return tuple(fn for comp in mod.components for fn in comp.functionalities)

    def feature_provider(self, kind: str) -> tuple[Module, Skill]:
        for m in self.modules:
            for s in m.skills:
                if s.feature == kind:
                    return m, s
        raise CatalogError(f"no skill provides feature {kind!r}")

    def known_endpoints(self) -> frozenset[str]:
        """Every service URL in the catalog, in canonical form."""
        urls = [s.endpoint for m in self.modules for s in m.skills]
        urls += [
            fn.url
            for m in self.modules
            for comp in m.components
            for fn in comp.functionalities
        ]
        return frozenset(canonical_url(u) for u in urls)

    # -- derivation ------------------------------------------------------

    def rebased(self, base_url: str) -> "Registry":
        """Copy of the registry with every service URL moved under base_url.

        Only scheme and network location are rewritten; paths are kept, so
        the identifiers baked into the catalog survive the move to a live
        service instance.
        """
        base = urlsplit(base_url)
        if not base.scheme or not base.netloc:
            raise CatalogError(f"base url must be absolute: {base_url!r}")

        def swap(url: str) -> str:
            parts = urlsplit(url)
            return urlunsplit((base.scheme, base.netloc, parts.path, "", ""))

        modules = tuple(
            Module(
                id=m.id,
                name=m.name,
                kind=m.kind,
                display=m.display,
                capability_noun=m.capability_noun,
                transport_phrase=m.transport_phrase,
                skills=tuple(
                    Skill(s.code, s.description, swap(s.endpoint), s.feature, s.role)
                    for s in m.skills
                ),
                components=tuple(
                    Component(
                        c.id,
                        c.name,
                        tuple(
                            Functionality(f.name, f.description, swap(f.url), f.parameters)
                            for f in c.functionalities
                        ),
                    )
                    for c in m.components
                ),
                operator_preamble=m.operator_preamble,
                info=m.info,
            )
            for m in self.modules
        )
        return Registry(modules=modules, prompts=self.prompts)


# ---------------------------------------------------------------------------
# URL path aliasing

_PLURAL_SEG = "/functionalities/"
_SINGULAR_SEG = "/functionality/"


def canonical_url(url: str) -> str:
    """Normalize a service URL to the plural functionality path form."""
    return url.replace(_SINGULAR_SEG, _PLURAL_SEG)


def alias_url(url: str) -> str:
    """The accepted singular spelling of a functionality URL."""
    return url.replace(_PLURAL_SEG, _SINGULAR_SEG)


# ---------------------------------------------------------------------------
# Loading

def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise CatalogError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _check_url(url: str, where: str) -> str:
    parts = urlsplit(url)
    if not parts.scheme or not parts.netloc or not parts.path:
        raise CatalogError(f"{where}: not an absolute service URL: {url!r}")
    return url


def _load_skill(raw: dict, where: str) -> Skill:
    code = _require(raw, "code", where)
    if not code or not code[0].isalpha() or not code[1:].isdigit() or len(code) < 2:
        raise CatalogError(f"{where}: bad skill code {code!r}")
    desc = _require(raw, "description", where)
    if not desc.strip():
        raise CatalogError(f"{where}: skill {code} has an empty description")
    endpoint = _check_url(_require(raw, "endpoint", where), f"{where} skill {code}")
    role = raw.get("role")
    if role is not None and role not in STORAGE_ROLES:
        raise CatalogError(f"{where}: skill {code} has unknown role {role!r}")
    return Skill(
        code=code,
        description=desc,
        endpoint=endpoint,
        feature=raw.get("feature"),
        role=role,
    )


def _load_component(raw: dict, where: str) -> Component:
    cid = _require(raw, "id", where)
    fns = []
    seen: set[str] = set()
    for fraw in raw.get("functionalities", []):
        name = _require(fraw, "name", f"{where} component {cid}")
        if name in seen:
            raise CatalogError(f"{where}: duplicate functionality {name!r} in {cid}")
        seen.add(name)
        fns.append(
            Functionality(
                name=name,
                description=_require(fraw, "description", f"functionality {name}"),
                url=_check_url(_require(fraw, "url", f"functionality {name}"), name),
                parameters=tuple(fraw.get("parameters", [])),
            )
        )
    return Component(id=cid, name=raw.get("name", cid), functionalities=tuple(fns))


def _load_module(raw: dict) -> Module:
    mid = _require(raw, "id", "module")
    where = f"module {mid}"
    kind = _require(raw, "kind", where)
    if kind not in MODULE_KINDS:
        raise CatalogError(f"{where}: unknown kind {kind!r}")
    skills = tuple(_load_skill(s, where) for s in _require(raw, "skills", where))
    if not skills:
        raise CatalogError(f"{where}: a module must offer at least one skill")
    return Module(
        id=mid,
        name=_require(raw, "name", where),
        kind=kind,
        display=_require(raw, "display", where),
        capability_noun=raw.get("capability_noun", "skills"),
        transport_phrase=raw.get("transport_phrase"),
        skills=skills,
        components=tuple(_load_component(c, where) for c in raw.get("components", [])),
        operator_preamble=tuple(raw.get("operator_preamble", [])),
        info=dict(raw.get("info", {})),
    )


def _load_prompts(raw: dict) -> PromptAssets:
    man = _require(raw, "manager", "prompts")
    op = _require(raw, "operator", "prompts")
    return PromptAssets(
        manager_role_goal=_require(man, "role_goal", "manager prompts"),
        manager_rules=tuple(_require(man, "rules", "manager prompts")),
        manager_modules_intro=_require(man, "modules_intro", "manager prompts"),
        manager_instructions=_require(man, "instructions", "manager prompts"),
        manager_examples=tuple(
            PromptExample(input=e["input"], output=e["output"])
            for e in _require(man, "examples", "manager prompts")
        ),
        operator_role_goal=_require(op, "role_goal", "operator prompts"),
        operator_instructions=_require(op, "instructions", "operator prompts"),
        operator_examples=tuple(
            TransportExample(
                input=e["input"],
                start_module=e["start_module"],
                target_module=e["target_module"],
            )
            for e in _require(op, "examples", "operator prompts")
        ),
        transport_output_template=_require(op, "output_template", "operator prompts"),
        transport_demand_template=_require(op, "demand_template", "operator prompts"),
    )


def registry_from_dict(data: dict) -> Registry:
    modules = tuple(_load_module(m) for m in data.get("modules", []))
    if not modules:
        raise CatalogError("catalog describes no modules")

    seen_modules: set[str] = set()
    seen_codes: set[str] = set()
    seen_features: set[str] = set()
    for m in modules:
        if m.id in seen_modules:
            raise CatalogError(f"duplicate module id {m.id!r}")
        seen_modules.add(m.id)
        for s in m.skills:
            if s.code in seen_codes:
                raise CatalogError(f"duplicate skill code {s.code}")
            seen_codes.add(s.code)
            if s.feature is not None:
                if s.feature in seen_features:
                    raise CatalogError(f"feature {s.feature!r} provided twice")
                seen_features.add(s.feature)

    registry = Registry(modules=modules, prompts=_load_prompts(_require(data, "prompts", "catalog")))
    # Both referenced by name elsewhere; fail at load time, not first use.
    registry.storage_skill("retrieve")
    registry.storage_skill("store")
    registry.transport_module()
    return registry


def load_catalog(path: str | Path) -> Registry:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"catalog file not found: {p}")
    with p.open("r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    return registry_from_dict(data)


def bundled_catalog() -> Registry:
    """The catalog shipped with the package (the reference plant)."""
    text = resources.files("plantagents.data").joinpath("catalog.json").read_text("utf-8")
    return registry_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Context rendering

def render_manager_context(registry: Registry) -> str:
    """Numbered plant description for the manager prompt.

    Process rules come first, then one entry per module listing its skills,
    numbered continuously and in catalog order.
    """
    lines = [f"({i}) {rule}" for i, rule in enumerate(registry.prompts.manager_rules, start=1)]
    lines.append(registry.prompts.manager_modules_intro)
    n = len(registry.prompts.manager_rules)
    # Module entries continue the rule numbering; the intro line is unnumbered.
    for mod in registry.modules:
        n += 1
        parts = ", ".join(f"({s.code}) {s.description}" for s in mod.skills)
        lines.append(f"({n}) {mod.display}. It has the following {mod.capability_noun}: {parts}.")
    return "\n".join(lines)


def render_operator_context(registry: Registry, module_id: str) -> str:
    """Functionality listing for one module, for the operator prompt."""
    mod = registry.module(module_id)
    fns = registry.module_functionalities(module_id)
    if not fns:
        raise CatalogError(f"module {module_id!r} exposes no functionalities")
    lines = list(mod.operator_preamble)
    for i, fn in enumerate(fns, start=1):
        lines.append(
            f'({i}) Functionality "{fn.name}" {fn.description}. '
            f'This functionality can be called using the URL "{fn.url}".'
        )
    return "\n".join(lines)
