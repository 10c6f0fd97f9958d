"""Scene model: objects as axis-aligned boxes on a floor at z = 0."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

# Per-category state schema: key -> (type, default).
CATEGORY_STATES: dict[str, dict[str, tuple[type, Any]]] = {
    "table": {"dirty": (bool, False), "bar": (bool, False), "milk_made": (bool, False)},
    "chair": {"aligned": (bool, True)},
    "coffee_machine": {"coffee_ready": (bool, False)},
    "kettle": {"poured": (bool, False)},
    "cup": {},
    "bread": {"taken": (bool, False)},
    "towel": {},
    "mop": {},
    "floor_scrubber": {},
    "air_conditioner": {"power": (bool, False), "setpoint": (int, 24)},
    "light_switch": {"on": (bool, False)},
    "curtain": {"open": (bool, True)},
    "stain": {"dirty": (bool, True)},
}
CATEGORIES: tuple[str, ...] = tuple(CATEGORY_STATES)

# Category -> RGB.  Index 0 of the segmentation is background, drawn as floor or sky.
CATEGORY_COLORS: dict[str, tuple[int, int, int]] = {
    "table": (139, 90, 43),
    "chair": (205, 133, 63),
    "coffee_machine": (40, 40, 40),
    "kettle": (192, 192, 192),
    "cup": (255, 255, 255),
    "bread": (222, 184, 135),
    "towel": (70, 130, 180),
    "mop": (50, 205, 50),
    "floor_scrubber": (255, 215, 0),
    "air_conditioner": (230, 230, 250),
    "light_switch": (255, 99, 71),
    "curtain": (128, 0, 128),
    "stain": (85, 107, 47),
}
FLOOR_COLOR = (160, 160, 160)
SKY_COLOR = (0, 0, 0)

ROBOT_RADIUS = 0.25
# Objects whose bottom is above this height do not block the base.
BASE_CLEARANCE = 1.5
GRID_CELL = 0.1


class SceneFormatError(ValueError):
    """Malformed scene JSON.  ``path`` names the offending field."""

    def __init__(self, path: str, reason: str, line: int | None = None):
        self.path = path
        self.reason = reason
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{path}: {reason}")


class SceneValidationError(ValueError):
    """Structurally valid JSON describing an impossible scene."""

    def __init__(self, object_id: int | None, reason: str):
        self.object_id = object_id
        self.reason = reason
        who = f"object {object_id}: " if object_id is not None else ""
        super().__init__(f"{who}{reason}")


@dataclass
class ObjectInstance:
    id: int
    category: str
    position: np.ndarray
    half_extents: np.ndarray
    surface_of: int | None = None
    state: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.half_extents = np.asarray(self.half_extents, dtype=float).reshape(3)

    @property
    def lo(self) -> np.ndarray:
        return self.position - self.half_extents

    @property
    def hi(self) -> np.ndarray:
        return self.position + self.half_extents

    @property
    def name(self) -> str:
        return f"{self.category}_{self.id}"

    def planar_distance(self, xy) -> float:
        """Distance in the floor plane from ``xy`` to this object's footprint."""
        x, y = float(xy[0]), float(xy[1])
        dx = max(self.lo[0] - x, 0.0, x - self.hi[0])
        dy = max(self.lo[1] - y, 0.0, y - self.hi[1])
        return math.hypot(dx, dy)

    def blocks_motion(self) -> bool:
        return self.surface_of is None and self.category != "stain" and self.lo[2] < BASE_CLEARANCE

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "category": self.category,
            "position": [float(v) for v in self.position],
            "half_extents": [float(v) for v in self.half_extents],
            "surface_of": self.surface_of,
            "state": dict(sorted(self.state.items())),
        }


@dataclass
class WorldScene:
    bounds: tuple[float, float, float, float]
    objects: list[ObjectInstance] = field(default_factory=list)

    def __post_init__(self):
        self.bounds = tuple(float(b) for b in self.bounds)

    # -- lookup -------------------------------------------------------------
    def get(self, object_id: int) -> ObjectInstance:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)

    def of_category(self, category: str) -> list[ObjectInstance]:
        return [o for o in self.objects if o.category == category]

    @property
    def ids(self) -> list[int]:
        return [o.id for o in self.objects]

    def copy(self) -> "WorldScene":
        return WorldScene(self.bounds, copy.deepcopy(self.objects))

    # -- free space ---------------------------------------------------------
    def blockers(self) -> list[ObjectInstance]:
        return [o for o in self.objects if o.blocks_motion()]

    def is_free(self, x: float, y: float, radius: float = ROBOT_RADIUS) -> bool:
        """True if a disc of ``radius`` at (x, y) is inside bounds and touches no blocker."""
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmin + radius <= x <= xmax - radius and ymin + radius <= y <= ymax - radius):
            return False
        return all(o.planar_distance((x, y)) > radius for o in self.blockers())

    def free_mask(self, xs: np.ndarray, ys: np.ndarray, radius: float = ROBOT_RADIUS) -> np.ndarray:
        """Vectorized :meth:`is_free` over arrays of coordinates."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        xmin, ymin, xmax, ymax = self.bounds
        ok = (xs >= xmin + radius) & (xs <= xmax - radius) & (ys >= ymin + radius) & (ys <= ymax - radius)
        for o in self.blockers():
            dx = np.maximum.reduce([o.lo[0] - xs, np.zeros_like(xs), xs - o.hi[0]])
            dy = np.maximum.reduce([o.lo[1] - ys, np.zeros_like(ys), ys - o.hi[1]])
            ok &= np.hypot(dx, dy) > radius
        return ok

    def grid_shape(self, cell: float = GRID_CELL) -> tuple[int, int]:
        xmin, ymin, xmax, ymax = self.bounds
        return int(math.ceil((xmax - xmin) / cell - 1e-9)), int(math.ceil((ymax - ymin) / cell - 1e-9))

    def cell_centers(self, cell: float = GRID_CELL) -> tuple[np.ndarray, np.ndarray]:
        nx, ny = self.grid_shape(cell)
        xs = self.bounds[0] + (np.arange(nx) + 0.5) * cell
        ys = self.bounds[1] + (np.arange(ny) + 0.5) * cell
        return np.meshgrid(xs, ys, indexing="ij")

    @property
    def walkable(self) -> np.ndarray:
        """Boolean ``(nx, ny)`` grid at :data:`GRID_CELL`, indexed ``[ix, iy]``.

        Recomputed on every access since objects may be edited in place.
        """
        gx, gy = self.cell_centers()
        return self.free_mask(gx, gy)

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"bounds": list(self.bounds), "objects": [o.to_json() for o in self.objects]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def default_state(category: str) -> dict[str, Any]:
    return {k: default for k, (_, default) in CATEGORY_STATES[category].items()}


def make_object(object_id, category, position, half_extents, surface_of=None, **state) -> ObjectInstance:
    """Build an object with default state for its category, overridden by ``state``."""
    st = default_state(category)
    st.update(state)
    return ObjectInstance(object_id, category, position, half_extents, surface_of, st)


def _vec(value, path: str) -> list[float]:
    if not isinstance(value, list) or len(value) != 3:
        raise SceneFormatError(path, "expected a list of 3 numbers")
    out = []
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise SceneFormatError(f"{path}[{k}]", "expected a finite number")
        out.append(float(v))
    return out


def scene_from_dict(data: Any) -> WorldScene:
    """Validate a decoded scene-JSON document and build a :class:`WorldScene`."""
    if not isinstance(data, dict):
        raise SceneFormatError("$", "expected an object")
    for key in ("bounds", "objects"):
        if key not in data:
            raise SceneFormatError(key, "missing field")
    b = data["bounds"]
    if not isinstance(b, list) or len(b) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in b):
        raise SceneFormatError("bounds", "expected [xmin, ymin, xmax, ymax]")
    if not (b[0] < b[2] and b[1] < b[3]):
        raise SceneValidationError(None, "bounds must have xmin < xmax and ymin < ymax")
    if not isinstance(data["objects"], list):
        raise SceneFormatError("objects", "expected a list")

    objects: list[ObjectInstance] = []
    for n, raw in enumerate(data["objects"]):
        path = f"objects[{n}]"
        if not isinstance(raw, dict):
            raise SceneFormatError(path, "expected an object")
        for key in ("id", "category", "position", "half_extents"):
            if key not in raw:
                raise SceneFormatError(f"{path}.{key}", "missing field")
        oid = raw["id"]
        if isinstance(oid, bool) or not isinstance(oid, int):
            raise SceneFormatError(f"{path}.id", "expected an integer")
        cat = raw["category"]
        if not isinstance(cat, str):
            raise SceneFormatError(f"{path}.category", "expected a string")
        pos = _vec(raw["position"], f"{path}.position")
        half = _vec(raw["half_extents"], f"{path}.half_extents")
        sup = raw.get("surface_of")
        if sup is not None and (isinstance(sup, bool) or not isinstance(sup, int)):
            raise SceneFormatError(f"{path}.surface_of", "expected an integer or null")
        st = raw.get("state", {})
        if not isinstance(st, dict):
            raise SceneFormatError(f"{path}.state", "expected an object")
        if cat not in CATEGORY_STATES:
            raise SceneValidationError(oid, f"unknown category {cat!r}")
        schema = CATEGORY_STATES[cat]
        for key, val in st.items():
            if key not in schema:
                raise SceneValidationError(oid, f"state key {key!r} not declared for category {cat}")
            typ = schema[key][0]
            if typ is int and (isinstance(val, bool) or not isinstance(val, int)):
                raise SceneFormatError(f"{path}.state.{key}", "expected an integer")
            if typ is bool and not isinstance(val, bool):
                raise SceneFormatError(f"{path}.state.{key}", "expected a boolean")
        objects.append(make_object(oid, cat, pos, half, sup, **st))

    scene = WorldScene(tuple(b), objects)
    validate_scene(scene)
    return scene


def validate_scene(scene: WorldScene) -> None:
    seen: set[int] = set()
    xmin, ymin, xmax, ymax = scene.bounds
    eps = 1e-9
    for o in scene.objects:
        if o.id <= 0:
            raise SceneValidationError(o.id, "ids must be positive")
        if o.id in seen:
            raise SceneValidationError(o.id, "duplicate id")
        seen.add(o.id)
        if np.any(o.half_extents <= 0):
            raise SceneValidationError(o.id, "half extents must be positive")
        if o.lo[0] < xmin - eps or o.lo[1] < ymin - eps or o.hi[0] > xmax + eps or o.hi[1] > ymax + eps:
            raise SceneValidationError(o.id, "footprint outside scene bounds")
        if o.lo[2] < -eps:
            raise SceneValidationError(o.id, "object extends below the floor")
    ids = {o.id: o for o in scene.objects}
    for o in scene.objects:
        if o.surface_of is not None:
            sup = ids.get(o.surface_of)
            if sup is None or sup.category != "table":
                raise SceneValidationError(o.id, f"surface_of={o.surface_of} is not a table in this scene")
    tables = scene.of_category("table")
    for a_idx, a in enumerate(tables):
        for b in tables[a_idx + 1:]:
            ox = min(a.hi[0], b.hi[0]) - max(a.lo[0], b.lo[0])
            oy = min(a.hi[1], b.hi[1]) - max(a.lo[1], b.lo[1])
            if ox > eps and oy > eps:
                raise SceneValidationError(b.id, f"table overlaps table {a.id}")


def load_scene(data: bytes | str) -> WorldScene:
    """Parse scene JSON bytes into a validated :class:`WorldScene`."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneFormatError("$", f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SceneFormatError("$", exc.msg, line=exc.lineno) from None
    return scene_from_dict(doc)


def dump_scene(scene: WorldScene) -> bytes:
    return scene.dumps().encode("utf-8")
