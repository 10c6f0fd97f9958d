"""Walk the fixture cafe once and look at what the robot remembers.

Run:  python demos/explore_and_map.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from cafebot.eval import run_tour
from cafebot.mem import to_png
from cafebot.simworld import cafe_small


def main(out_dir: str = "demo_out") -> None:
    scene = cafe_small()
    print(f"cafe: {len(scene.objects)} objects in a {scene.bounds[2]:.0f} x {scene.bounds[3]:.0f} m room")

    mem, robot, log = run_tour(scene)
    print(f"tour: {log.waypoints_reached} waypoints, {log.distance:.1f} m driven, {len(log.occupied)} frames")

    # the floor plan only ever gains occupied cells as frames arrive
    steps = np.diff(log.occupied)
    print(f"occupied cells grew from {log.occupied[0]} to {log.occupied[-1]}; largest jump {steps.max()}")

    print("\nlanguage memory (id, category, position):")
    worst = 0.0
    for e in mem.entries():
        obj = scene.get(e.object_id)
        gap = np.linalg.norm(np.maximum.reduce([obj.lo - e.world_pos, np.zeros(3), np.asarray(e.world_pos) - obj.hi]))
        worst = max(worst, gap)
        print("  " + e.line())
    print(f"every remembered point lies within {worst * 100:.2f} cm of its object's box")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "floorplan.png").write_bytes(to_png(mem.plan))
    print(f"\nfloor plan written to {out / 'floorplan.png'}")


if __name__ == "__main__":
    main(*sys.argv[1:2])
