"""Command-line entry point: ``cafebot <command> [flags]``.

Every command is deterministic given its flags and a scripted or recorded
backend.  Failures exit nonzero with one ``error: <kind>: <reason>`` line on
stderr; bad usage exits 2.  Missed evaluation thresholds exit 3.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import eqa
from .eval.harness import Ablation, eqa_subset, explored, run_instruction_eval, run_eqa_eval
from .eval.instructions import dump_cases, generate_instructions, load_cases
from .eval.tour import run_tour
from .mem.floorplan import to_pgm, to_png
from .mem.memory import serialize_memory
from .planner.backends import make_backend
from .planner.core import PlannerRequest, plan
from .planner.eqa_loop import EqaCaps
from .planner.grammar import Plan
from .simworld.fixtures import cafe_small
from .simworld.scene import dump_scene, load_scene
from .skills import execute

EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_THRESHOLD = 3


class CliError(Exception):
    def __init__(self, kind: str, reason: str):
        self.kind = kind
        self.reason = reason
        super().__init__(f"{kind}: {reason}")


def _scene(path: str | None):
    if path is None:
        return cafe_small()
    try:
        return load_scene(Path(path).read_bytes())
    except OSError as exc:
        raise CliError("io", f"cannot read scene {path}: {exc.strerror}") from exc


def _write(path: str | None, data: bytes) -> None:
    if path is None:
        sys.stdout.write(data.decode("utf-8"))
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(data)


def _ablation(flags) -> Ablation:
    flags = set(flags or [])
    bad = flags - {"no-mem", "no-lang", "no-image"}
    if bad:
        raise CliError("usage", f"unknown ablation {sorted(bad)[0]}")
    return Ablation("no-mem" in flags, "no-lang" in flags, "no-image" in flags)


def _thresholds(pairs) -> dict:
    out = {}
    for p in pairs or []:
        key, sep, val = p.partition("=")
        if not sep:
            raise CliError("usage", f"threshold must be NAME=VALUE, got {p!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise CliError("usage", f"threshold {key} is not a number") from None
    return out


# -- commands ---------------------------------------------------------------

def cmd_gen_scenes(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for s in range(args.seeds):
        seed = args.base_seed + s
        (out / f"scene_{seed:03d}.json").write_bytes(dump_scene(eqa.randomize_scene(seed)))
    print(f"wrote {args.seeds} scenes to {out}")
    return 0


def cmd_explore(args) -> int:
    scene = _scene(args.scene)
    mem, robot, log = run_tour(scene)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "memory.json").write_bytes(serialize_memory(mem))
    (out / "floorplan.pgm").write_bytes(to_pgm(mem.plan))
    (out / "floorplan.png").write_bytes(to_png(mem.plan))
    doc = {"occupied_per_frame": log.occupied, "objects_per_frame": log.objects,
           "waypoints_reached": log.waypoints_reached, "distance": round(log.distance, 6),
           "objects": [e.line() for e in mem.entries()]}
    (out / "tour.json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    print(f"{len(mem.language)} objects, {mem.plan.occupied_count()} occupied cells -> {out}")
    return 0


def cmd_gen_eqa(args) -> int:
    items = eqa.generate_dataset(args.seeds, args.per_template, args.base_seed)
    data = eqa.write_dataset(items)
    # validate before writing
    if eqa.write_dataset(eqa.read_dataset(data)) != data:
        raise CliError("internal", "dataset does not round-trip")
    _write(args.out, data)
    if args.out:
        print(f"wrote {len(items)} items to {args.out}")
    return 0


def cmd_plan(args) -> int:
    if not args.instruction.strip():
        args.parser.error("--instruction must not be empty")
    scene = _scene(args.scene)
    backend = make_backend(args.backend)
    ab = _ablation(args.ablate)
    mem, robot = explored(scene)
    failed: list[tuple[Plan, str]] = []
    ok = False
    for attempt in range(1, args.attempts + 1):
        world, bot = scene.copy(), robot.copy()
        p = plan(PlannerRequest.build(args.instruction, mem, failed, ab.use_language, ab.use_image), backend)
        print(f"# attempt {attempt}")
        print(p.render())
        print("# trace")
        bad = None
        for action in p.steps:
            out = execute(action, world, bot, mem)
            reason = out.reason.value if out.reason else "-"
            print(f"{action.render()}\t{'ok' if out.success else 'FAILED'}\t{reason}\t{out.detail}".rstrip())
            if not out.success and bad is None:
                bad = f"{action.render()} failed: {reason} {out.detail}".strip()
        if bad is None and p.steps:
            ok = True
            break
        failed.append((p, bad or "empty plan"))
    return 0 if ok else EXIT_ERROR


def cmd_eval_instr(args) -> int:
    scene = _scene(args.scene)
    backend = make_backend(args.backend)
    if args.cases:
        cases = load_cases(Path(args.cases).read_bytes())
    else:
        mem, robot = explored(scene)
        cases = generate_instructions(args.seed, args.gen, args.count, scene, robot, mem)
        if args.save_cases:
            _write(args.save_cases, dump_cases(cases))
    config = {"cases": args.cases or f"gen:{args.gen}:{args.count}", "scene": args.scene or "cafe_small"}
    report = run_instruction_eval(cases, backend, scene, args.seed, _ablation(args.ablate),
                                  args.attempts, args.jobs, config)
    missed = report.check_thresholds(_thresholds(args.threshold))
    _write(args.out, report.dumps())
    if args.out:
        sys.stdout.write(report.summary())
    return EXIT_THRESHOLD if missed else 0


def cmd_eval_eqa(args) -> int:
    try:
        items = eqa.read_dataset(Path(args.dataset).read_bytes())
    except OSError as exc:
        raise CliError("io", f"cannot read dataset {args.dataset}: {exc.strerror}") from exc
    if args.subset:
        items = eqa_subset(items, args.subset, args.seed)
    backend = make_backend(args.backend)
    caps = EqaCaps(max_explorations=args.max_explorations)
    config = {"dataset": Path(args.dataset).name, "subset": args.subset}
    report = run_eqa_eval(items, backend, args.mode, caps, _ablation(args.ablate), args.seed, args.jobs, config)
    missed = report.check_thresholds(_thresholds(args.threshold))
    _write(args.out, report.dumps())
    if args.out:
        sys.stdout.write(report.summary())
    return EXIT_THRESHOLD if missed else 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cafebot", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON file whose keys mirror the command's flags")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn, parser=p)
        p.add_argument("--config", help=argparse.SUPPRESS)
        return p

    def common_eval(p):
        p.add_argument("--backend", default="scripted", help="scripted | remote | recorded:DIR | record:DIR")
        p.add_argument("--ablate", action="append", choices=["no-mem", "no-lang", "no-image"], default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--threshold", action="append", metavar="NAME=VALUE",
                       help="minimum for a metric, or NAME_max=VALUE for a maximum")
        p.add_argument("--out", help="report path (stdout if omitted)")

    p = add("gen-scenes", cmd_gen_scenes, "write randomized scene JSON files")
    p.add_argument("--seeds", type=int, default=70)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("explore", cmd_explore, "run the exploration tour and export memory and floor plan")
    p.add_argument("--scene", help="scene JSON (default: bundled cafe_small)")
    p.add_argument("--out", required=True)

    p = add("gen-eqa", cmd_gen_eqa, "generate the question-answering dataset")
    p.add_argument("--seeds", type=int, default=70)
    p.add_argument("--per-template", type=int, default=3)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out")

    p = add("plan", cmd_plan, "plan one instruction and print the execution trace")
    p.add_argument("--scene")
    p.add_argument("--instruction", required=True)
    p.add_argument("--backend", default="scripted")
    p.add_argument("--ablate", action="append", choices=["no-mem", "no-lang", "no-image"], default=None)
    p.add_argument("--attempts", type=int, default=3)

    p = add("eval-instr", cmd_eval_instr, "instruction planning evaluation")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--cases", help="case file written by --save-cases")
    src.add_argument("--gen", choices=["short", "long"], default="short")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--scene")
    p.add_argument("--attempts", type=int, default=1)
    p.add_argument("--save-cases")
    common_eval(p)

    p = add("eval-eqa", cmd_eval_eqa, "question answering evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=["single", "multi"], default="single")
    p.add_argument("--subset", type=int, default=0, help="evaluate only this many randomly chosen scenes")
    p.add_argument("--max-explorations", type=int, default=10)
    common_eval(p)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Use the ``--config`` file's keys as defaults for the chosen command."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError("config", f"cannot load {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError("config", "config file must hold a JSON object")
    cmd = next((a for a in rest if not a.startswith("-")), None)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if cmd in sub.choices:
        sub.choices[cmd].set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        # options marked required are satisfied by the config file
        for act in sub.choices[cmd]._actions:
            if act.dest in {k.replace("-", "_") for k in cfg}:
                act.required = False


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            parser.error("--jobs must be >= 1")
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except CliError as exc:
        print(f"error: {exc.kind}: {exc.reason}", file=sys.stderr)
        return EXIT_USAGE if exc.kind == "usage" else EXIT_ERROR
    except Exception as exc:  # every failure is reported on one line
        reason = " ".join(str(exc).split()) or type(exc).__name__
        print(f"error: {type(exc).__name__}: {reason}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
