"""Phase one of every episode: a fixed exploration circuit that builds memory."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..mem.memory import EnvironmentMemory, integrate_frame
from ..simworld.fixtures import default_start, tour_waypoints
from ..simworld.motion import follow_path, plan_path
from ..simworld.robot import RobotState
from ..simworld.scene import WorldScene
from ..simworld.sensors import observe_four_directions


@dataclass
class TourLog:
    """Per-step occupied-cell counts and language-memory sizes, one per frame."""

    occupied: list[int] = field(default_factory=list)
    objects: list[int] = field(default_factory=list)
    waypoints_reached: int = 0
    distance: float = 0.0


def run_tour(scene: WorldScene, robot: RobotState | None = None, mem: EnvironmentMemory | None = None,
             n_cols: int = 5, n_rows: int = 2) -> tuple[EnvironmentMemory, RobotState, TourLog]:
    """Visit the serpentine waypoints, observing in four directions at each.

    The robot starts at :func:`default_start` unless given.  Waypoints that
    cannot be reached are skipped; observation still happens where the robot
    stopped.
    """
    if robot is None:
        robot = RobotState.at(*default_start(scene))
    if mem is None:
        mem = EnvironmentMemory.empty(scene.bounds)
    log = TourLog()
    for step, wp in enumerate(tour_waypoints(scene, n_cols, n_rows), start=1):
        path = plan_path(scene, robot.xy, _goal_mask(scene, wp))
        if path is not None:
            res = follow_path(scene, robot, path)
            log.distance += res.path_length
            log.waypoints_reached += int(res.reached)
        for frame in observe_four_directions(scene, robot):
            mem = integrate_frame(mem, frame, step=step)
            log.occupied.append(mem.plan.occupied_count())
            log.objects.append(len(mem.language))
    return mem, robot, log


def _goal_mask(scene: WorldScene, wp):
    gx, gy = scene.cell_centers()
    d2 = (gx - wp[0]) ** 2 + (gy - wp[1]) ** 2
    return d2 <= d2.min() + 1e-12
