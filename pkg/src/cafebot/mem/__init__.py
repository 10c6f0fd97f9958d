"""Multimodal environment memory: object positions plus fused point cloud and floor plan."""

from .centers import DEFAULT_ZETA, NoObservationError, locate_pixel_center, snap_to_pixels, two_means
from .cloud import ColoredPointCloud, OutlierParams, SmallCloudWarning, outlier_mask, remove_outliers
from .floorplan import FREE, OCCUPIED, UNKNOWN, FloorPlan, project_floor_plan, to_pgm, to_png, update_floor_plan
from .memory import (
    EnvironmentMemory,
    LanguageMemoryEntry,
    MemoryFormatError,
    Observation,
    deserialize_memory,
    extract_object_observations,
    frame_point_cloud,
    integrate_frame,
    serialize_memory,
)

__all__ = [
    "DEFAULT_ZETA",
    "FREE",
    "OCCUPIED",
    "UNKNOWN",
    "ColoredPointCloud",
    "EnvironmentMemory",
    "FloorPlan",
    "LanguageMemoryEntry",
    "MemoryFormatError",
    "NoObservationError",
    "Observation",
    "OutlierParams",
    "SmallCloudWarning",
    "deserialize_memory",
    "extract_object_observations",
    "frame_point_cloud",
    "integrate_frame",
    "locate_pixel_center",
    "outlier_mask",
    "project_floor_plan",
    "remove_outliers",
    "serialize_memory",
    "snap_to_pixels",
    "to_pgm",
    "to_png",
    "two_means",
    "update_floor_plan",
]
