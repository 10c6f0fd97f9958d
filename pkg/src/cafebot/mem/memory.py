"""Environment memory: object language memory plus point-cloud image memory."""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ..geometry import pixel_to_world_fused
from ..simworld.scene import CATEGORY_COLORS
from ..simworld.sensors import SensorFrame
from .centers import DEFAULT_ZETA, locate_pixel_center, snap_to_pixels
from .cloud import ColoredPointCloud
from .floorplan import DEFAULT_CELL, DEFAULT_Z_BAND, FloorPlan, empty_plan, update_floor_plan

FORMAT_VERSION = 1

_COLOR_TO_CATEGORY = {rgb: cat for cat, rgb in CATEGORY_COLORS.items()}


class MemoryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LanguageMemoryEntry:
    object_id: int
    category: str
    world_pos: tuple[float, float, float]
    last_seen: int

    @property
    def name(self) -> str:
        return f"{self.category}_{self.object_id}"

    def line(self) -> str:
        x, y, z = self.world_pos
        return f"{self.object_id}, {self.category}, ({x:.2f}, {y:.2f}, {z:.2f})"


class Observation(NamedTuple):
    object_id: int
    category: str
    world_pos: np.ndarray


@dataclass(frozen=True)
class EnvironmentMemory:
    """Immutable snapshot; :func:`integrate_frame` returns a new one.

    ``plan`` is always derivable from ``cloud`` with :func:`project_floor_plan`
    over ``bounds`` at ``cell_size`` and ``z_band``.
    """

    bounds: tuple[float, float, float, float]
    language: dict[int, LanguageMemoryEntry] = field(default_factory=dict)
    cloud: ColoredPointCloud = field(default_factory=ColoredPointCloud)
    plan: FloorPlan | None = None
    language_memory: bool = True
    image_memory: bool = True
    cell_size: float = DEFAULT_CELL
    z_band: tuple[float, float] = DEFAULT_Z_BAND
    zeta: float = DEFAULT_ZETA

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        object.__setattr__(self, "z_band", (float(self.z_band[0]), float(self.z_band[1])))
        if self.plan is None:
            object.__setattr__(self, "plan", update_floor_plan(empty_plan(self.bounds, self.cell_size, self.z_band), self.cloud))

    @classmethod
    def empty(cls, bounds, language_memory: bool = True, image_memory: bool = True, **kw) -> "EnvironmentMemory":
        return cls(tuple(bounds), language_memory=language_memory, image_memory=image_memory, **kw)

    def entries(self) -> list[LanguageMemoryEntry]:
        return [self.language[k] for k in sorted(self.language)]

    def of_category(self, category: str) -> list[LanguageMemoryEntry]:
        return [e for e in self.entries() if e.category == category]

    def with_flags(self, language_memory: bool | None = None, image_memory: bool | None = None) -> "EnvironmentMemory":
        return replace(
            self,
            language_memory=self.language_memory if language_memory is None else language_memory,
            image_memory=self.image_memory if image_memory is None else image_memory,
        )

    def render_text(self) -> str:
        """Language memory as ``id, category, (x, y, z)`` lines plus a floor-plan summary."""
        lines = [e.line() for e in self.entries()]
        s = self.plan.summary()
        b = s["bounds"]
        lines.append(
            f"floor plan: bounds ({b[0]:.1f}, {b[1]:.1f})-({b[2]:.1f}, {b[3]:.1f}), "
            f"cell {s['cell_size']:.2f} m, occupied {s['occupied_fraction']:.3f}, known {s['known_fraction']:.3f}"
        )
        return "\n".join(lines)


def category_at(frame: SensorFrame, i: int, j: int) -> str | None:
    return _COLOR_TO_CATEGORY.get(tuple(int(v) for v in frame.rgb[j, i]))


def extract_object_observations(frame: SensorFrame, zeta: float = DEFAULT_ZETA) -> list[Observation]:
    """Locate every segmented object in ``frame`` in world coordinates.

    The category comes from the pixel color at the chosen center (the color
    table is fixed per category).
    """
    seg = frame.segmentation
    out: list[Observation] = []
    for oid in sorted(int(v) for v in np.unique(seg) if v != 0):
        jj, ii = np.nonzero(seg == oid)
        pix = np.stack([ii, jj], axis=1)
        center = locate_pixel_center(pix, zeta)
        i, j = (int(v) for v in snap_to_pixels(center, pix))
        depth = float(frame.depth[j, i])
        if not depth > 0:
            continue
        pos = pixel_to_world_fused(frame.intr, frame.extr, frame.pose, i, j, depth)
        category = category_at(frame, i, j)
        if category is None:
            continue
        out.append(Observation(oid, category, np.asarray(pos, dtype=float)))
    return out


def frame_point_cloud(frame: SensorFrame) -> ColoredPointCloud:
    """Back-project every pixel with a depth return into a colored world cloud."""
    jj, ii = np.nonzero(frame.depth > 0)
    if len(ii) == 0:
        return ColoredPointCloud()
    pts = pixel_to_world_fused(frame.intr, frame.extr, frame.pose, ii, jj, frame.depth[jj, ii])
    return ColoredPointCloud(pts, frame.rgb[jj, ii])


def integrate_frame(mem: EnvironmentMemory, frame: SensorFrame, zeta: float | None = None, step: int = 0,
                    observations: list[Observation] | None = None) -> EnvironmentMemory:
    """Fold one frame into the memory, returning a new snapshot.

    Language entries are upserted with the latest observation winning.
    ``step`` is the caller's episode step, stored as ``last_seen``.
    ``observations`` may pass in the result of
    :func:`extract_object_observations` for this frame if the caller already
    has it.
    """
    zeta = mem.zeta if zeta is None else zeta
    language = mem.language
    if mem.language_memory:
        language = dict(language)
        if observations is None:
            observations = extract_object_observations(frame, zeta)
        for obs in observations:
            language[obs.object_id] = LanguageMemoryEntry(
                obs.object_id, obs.category, tuple(float(v) for v in obs.world_pos), int(step)
            )
    cloud, plan = mem.cloud, mem.plan
    if mem.image_memory:
        new = frame_point_cloud(frame)
        cloud = cloud.concat(new)
        plan = update_floor_plan(plan, new)
    if language is mem.language and cloud is mem.cloud:
        return mem
    return replace(mem, language=language, cloud=cloud, plan=plan)


# -- serialization ---------------------------------------------------------

def _b64(a: np.ndarray, dtype) -> str:
    return base64.b64encode(np.ascontiguousarray(a, dtype=dtype).tobytes()).decode("ascii")


def _unb64(s: str, dtype, cols: int) -> np.ndarray:
    return np.frombuffer(base64.b64decode(s.encode("ascii"), validate=True), dtype=dtype).reshape(-1, cols)


def memory_to_dict(mem: EnvironmentMemory) -> dict:
    return {
        "version": FORMAT_VERSION,
        "bounds": list(mem.bounds),
        "flags": {"language_memory": mem.language_memory, "image_memory": mem.image_memory},
        "cell_size": mem.cell_size,
        "z_band": list(mem.z_band),
        "zeta": mem.zeta,
        "language": [
            {"id": e.object_id, "category": e.category, "world_pos": list(e.world_pos), "last_seen": e.last_seen}
            for e in mem.entries()
        ],
        "cloud": {
            "count": len(mem.cloud),
            "points_f64le": _b64(mem.cloud.points, "<f8"),
            "colors_u8": _b64(mem.cloud.colors, "u1"),
        },
    }


def serialize_memory(mem: EnvironmentMemory) -> bytes:
    """JSON bytes.  Cloud arrays are stored as base64 little-endian binary so they round-trip bit-exactly."""
    return json.dumps(memory_to_dict(mem), sort_keys=True).encode("utf-8")


def deserialize_memory(data: bytes | str) -> EnvironmentMemory:
    try:
        doc = json.loads(data)
        if doc.get("version") != FORMAT_VERSION:
            raise MemoryFormatError(f"unsupported memory format version {doc.get('version')!r}")
        language = {}
        for e in doc["language"]:
            pos = tuple(float(v) for v in e["world_pos"])
            if len(pos) != 3:
                raise MemoryFormatError("world_pos must have 3 components")
            language[int(e["id"])] = LanguageMemoryEntry(int(e["id"]), str(e["category"]), pos, int(e["last_seen"]))
        c = doc["cloud"]
        pts = _unb64(c["points_f64le"], "<f8", 3).astype(float)
        cols = _unb64(c["colors_u8"], "u1", 3)
        if len(pts) != c["count"]:
            raise MemoryFormatError("cloud count does not match payload")
        return EnvironmentMemory(
            bounds=tuple(doc["bounds"]),
            language=language,
            cloud=ColoredPointCloud(pts, cols),
            language_memory=bool(doc["flags"]["language_memory"]),
            image_memory=bool(doc["flags"]["image_memory"]),
            cell_size=float(doc["cell_size"]),
            z_band=tuple(doc["z_band"]),
            zeta=float(doc["zeta"]),
        )
    except MemoryFormatError:
        raise
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise MemoryFormatError(f"malformed memory document: {exc}") from exc
