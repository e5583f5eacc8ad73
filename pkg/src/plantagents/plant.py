"""Deterministic simulation of the modular production plant.

One transport robot with a docking state machine, module stations with a
single hand-off point each, a storage module with an inventory, and
workpieces whose feature lists grow as skills are applied.  All mutations
pass through one lock; the state version counts successful calls.
"""

from __future__ import annotations

import copy
import itertools
import threading
from dataclasses import dataclass, field

from .catalog import Registry

MATERIALS = ("steel", "wood")

# Pseudo-location for a workpiece riding on the transport robot.
ON_ROBOT = "robot"


class PlantFault(Exception):
    """A functionality or skill precondition was violated.

    The plant state is left exactly as it was; the reason text names the
    operation and the violated condition.
    """

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Feature:
    kind: str
    detail: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "detail": self.detail}

    @classmethod
    def from_dict(cls, raw: dict) -> "Feature":
        return cls(kind=raw["kind"], detail=raw.get("detail"))


@dataclass
class Workpiece:
    id: str
    material: str
    # Assigned features in application order; kinds never repeat.
    features: list[Feature] = field(default_factory=list)
    location: str = ON_ROBOT
    in_inventory: bool = False

    def feature_kinds(self) -> list[str]:
        return [f.kind for f in self.features]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "material": self.material,
            "features": [f.to_dict() for f in self.features],
            "location": self.location,
            "in_inventory": self.in_inventory,
        }


@dataclass
class RobotState:
    position: str | None = None
    docked: bool = False
    carrying: str | None = None

    def to_dict(self) -> dict:
        return {
            "position": self.position,
            "docked": self.docked,
            "carrying": self.carrying,
        }


@dataclass
class PlantState:
    workpieces: dict[str, Workpiece]
    robot: RobotState
    version: int = 0

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "robot": self.robot.to_dict(),
            "workpieces": {wid: wp.to_dict() for wid, wp in self.workpieces.items()},
        }


class PlantSim:
    """The live plant: registry-aware state plus the mutation rules."""

    def __init__(self, registry: Registry, state: PlantState) -> None:
        self.registry = registry
        self.state = state
        self._lock = threading.Lock()

    # -- factories ---------------------------------------------------------

    @classmethod
    def standard_start(
        cls,
        registry: Registry,
        workpiece_id: str = "wp1",
        material: str = "steel",
        location: str | None = None,
        in_inventory: bool = True,
    ) -> "PlantSim":
        """Fresh plant: robot undocked at storage, one workpiece in storage.

        ``in_inventory=False`` places the workpiece at the hand-off point
        instead, the situation right after a retrieve skill.
        """
        if material not in MATERIALS:
            raise ValueError(f"unknown material {material!r}")
        loc = location or registry.storage_module().id
        registry.module(loc)
        wp = Workpiece(
            id=workpiece_id,
            material=material,
            location=loc,
            in_inventory=in_inventory,
        )
        robot = RobotState(position=registry.storage_module().id, docked=False)
        return cls(registry, PlantState(workpieces={wp.id: wp}, robot=robot))

    def clone(self) -> "PlantSim":
        """Independent copy sharing the registry; used for dry-run simulation."""
        return PlantSim(self.registry, copy.deepcopy(self.state))

    # -- views -------------------------------------------------------------

    def snapshot(self) -> dict:
        with self._lock:
            return self.state.to_dict()

    def module_snapshot(self, module_id: str) -> dict:
        mod = self.registry.module(module_id)
        with self._lock:
            at_module = {
                wid: wp.to_dict()
                for wid, wp in self.state.workpieces.items()
                if wp.location == mod.id
            }
            robot = self.state.robot
            return {
                "version": self.state.version,
                "module": mod.id,
                "workpieces": at_module,
                "robot_docked_here": bool(robot.docked and robot.position == mod.id),
            }

    def sole_workpiece(self) -> Workpiece:
        wps = list(self.state.workpieces.values())
        if len(wps) != 1:
            raise PlantFault(f"expected exactly one workpiece, found {len(wps)}")
        return wps[0]

    # -- mutations ---------------------------------------------------------

    def apply_functionality(self, name: str, params: dict | None = None) -> int:
        """Run one transport-robot functionality; returns the new version."""
        params = params or {}
        with self._lock:
            handler = getattr(self, f"_fn_{name}", None)
            if handler is None or not name.islower():
                raise PlantFault(f"unknown functionality: {name}")
            handler(params)
            self.state.version += 1
            return self.state.version

    def apply_skill(self, code: str, workpiece_id: str, detail: str | None = None) -> int:
        """Run one module skill on a workpiece; returns the new version."""
        with self._lock:
            if not self.registry.has_skill(code):
                raise PlantFault(f"unknown skill: {code}")
            host = self.registry.skill_host(code)
            skill = self.registry.skill(code)
            if host.kind == "transport":
                raise PlantFault("transport skills execute via operator agent")
            wp = self.state.workpieces.get(workpiece_id)
            if wp is None:
                raise PlantFault(f"unknown workpiece: {workpiece_id}")
            if wp.location == ON_ROBOT:
                raise PlantFault(f"{code}: workpiece is on the transport robot")
            if wp.location != host.id:
                raise PlantFault(f"workpiece not at {host.name}")

            if skill.role == "retrieve":
                # Tolerant re-retrieve: already at the hand-off point is a no-op.
                wp.in_inventory = False
            elif skill.role == "store":
                wp.in_inventory = True
            else:
                if wp.in_inventory:
                    raise PlantFault(f"{code}: workpiece is in storage inventory")
                assert skill.feature is not None
                # Re-applying a feature succeeds without duplicating it.
                if skill.feature not in wp.feature_kinds():
                    wp.features.append(Feature(kind=skill.feature, detail=detail))
            self.state.version += 1
            return self.state.version

    # -- functionality semantics -------------------------------------------
    # Preconditions are all checked before any assignment, so a raised
    # PlantFault never leaves a half-applied mutation behind.

    def _fn_move_dock(self, params: dict) -> None:
        target = params.get("target_module")
        if not target:
            raise PlantFault("move_dock: missing parameter target_module")
        if not self.registry.has_module(target):
            raise PlantFault(f"move_dock: unknown module {target!r}")
        robot = self.state.robot
        # Re-docking at the current module is tolerated as a no-op; docking
        # elsewhere requires undocking first.
        if robot.docked and robot.position != target:
            raise PlantFault("move_dock: robot docked")
        robot.position = target
        robot.docked = True

    def _fn_load(self, params: dict) -> None:
        robot = self.state.robot
        if not robot.docked:
            raise PlantFault("load: robot not docked")
        if robot.carrying is not None:
            raise PlantFault("load: robot already carrying a workpiece")
        wp = self._workpiece_at_handoff(robot.position)
        if wp is None:
            # Stations fetch from inventory when the hand-off is clear
            # (only the storage module keeps one).
            wp = self._workpiece_in_inventory(robot.position)
        if wp is None:
            raise PlantFault(f"load: no workpiece at {robot.position}")
        wp.location = ON_ROBOT
        wp.in_inventory = False
        robot.carrying = wp.id

    def _fn_unload(self, params: dict) -> None:
        robot = self.state.robot
        if not robot.docked:
            raise PlantFault("unload: robot not docked")
        if robot.carrying is None:
            raise PlantFault("unload: robot not carrying a workpiece")
        if self._workpiece_at_handoff(robot.position) is not None:
            raise PlantFault(f"unload: hand-off point occupied at {robot.position}")
        wp = self.state.workpieces[robot.carrying]
        wp.location = robot.position
        wp.in_inventory = False
        robot.carrying = None

    def _fn_undock(self, params: dict) -> None:
        robot = self.state.robot
        if not robot.docked:
            raise PlantFault("undock: robot not docked")
        # Mid-transport the robot always carries cargo; undocking empty is
        # a wasted motion the physics rejects.
        if robot.carrying is None:
            raise PlantFault("undock: robot not carrying a workpiece")
        robot.docked = False

    def _workpiece_at_handoff(self, module_id: str | None) -> Workpiece | None:
        for wp in self.state.workpieces.values():
            if wp.location == module_id and not wp.in_inventory:
                return wp
        return None

    def _workpiece_in_inventory(self, module_id: str | None) -> Workpiece | None:
        for wp in self.state.workpieces.values():
            if wp.location == module_id and wp.in_inventory:
                return wp
        return None


def transport_functionality_calls(start: str, target: str) -> list[tuple[str, dict]]:
    """The canonical five-call expansion of one transport skill."""
    return [
        ("move_dock", {"target_module": start}),
        ("load", {}),
        ("undock", {}),
        ("move_dock", {"target_module": target}),
        ("unload", {}),
    ]


def permutation_survey(registry: Registry, start: str, target: str) -> list[int]:
    """Indices (into the 120 lexicographic permutations) that run fault-free.

    Each permutation of the canonical five-call transport sequence is run
    from the standard start with the workpiece at the start module's
    hand-off point.  The expected survivor is the identity permutation.
    """
    calls = transport_functionality_calls(start, target)
    survivors = []
    for idx, perm in enumerate(itertools.permutations(range(len(calls)))):
        sim = PlantSim.standard_start(registry, location=start, in_inventory=False)
        try:
            for i in perm:
                name, params = calls[i]
                sim.apply_functionality(name, params)
        except PlantFault:
            continue
        survivors.append(idx)
    return survivors
