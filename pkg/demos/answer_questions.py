"""Answer questions about a fresh cafe, first one at a time and then as a session.

Run:  python demos/answer_questions.py
"""

from cafebot import eqa
from cafebot.eval import run_eqa_eval
from cafebot.planner import ScriptedBackend


def main() -> None:
    # answer balance is enforced over the whole dataset, so build it all and take one scene
    dataset = eqa.generate_dataset()
    items = [it for it in dataset if it.scene_id == dataset[0].scene_id]
    print(f"{len(items)} questions about scene {items[0].scene_id}:")
    for it in items[:5]:
        print(f"  [{it.template_id}] {it.question}  ->  {it.answer}")
    print()

    backend = ScriptedBackend()
    single = run_eqa_eval(items, backend, "single")
    multi = run_eqa_eval(items, backend, "multi")

    # single-round starts every question with an empty memory;
    # multi-round keeps what earlier questions revealed
    for name, rep in (("one at a time", single), ("as a session", multi)):
        a = rep.aggregates
        print(f"{name:<14} accuracy {a['ACC']:.2f}  explorations {a['EC']:.2f}  "
              f"unreachable {a['UPC']:.2f}  path {a['PL']:.0f} cm per question")


if __name__ == "__main__":
    main()
