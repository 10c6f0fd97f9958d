"""Generate a few requests, plan them with and without memory, and score the plans.

Run:  python demos/plan_instructions.py
"""

from cafebot.eval import Ablation, explored, generate_instructions, run_instruction_eval
from cafebot.planner import ScriptedBackend
from cafebot.simworld import cafe_small


def main() -> None:
    scene = cafe_small()
    mem, robot = explored(scene)
    cases = generate_instructions(seed=11, length="short", count=5, scene=scene, robot=robot, mem=mem)

    for case in cases[:2]:
        print(f"request: {case.text}")
        print("reference plan:")
        for step in case.grounding_plan.steps:
            print(f"  {step.render()}")
        print()

    backend = ScriptedBackend()
    with_mem = run_instruction_eval(cases, backend, scene, seed=11)
    without = run_instruction_eval(cases, backend, scene, seed=11, ablation=Ablation(no_mem=True))

    first = with_mem.records[0]
    print("planned with memory:")
    for s in first["steps"]:
        print(f"  {s['action']:<32} {'ok' if s['success'] else 'failed: ' + s['reason']}")
    print()
    print(with_mem.summary())
    print("same requests with memory withheld from the planner:")
    print(without.summary())


if __name__ == "__main__":
    main()
