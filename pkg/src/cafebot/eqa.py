"""Embodied-QA dataset: seeded cafe layouts, templated questions and a geometric answer oracle.

Placement ranges per category:

* tables: one per slot of a 4 x 3 lattice (jittered by up to 0.15 m), 3 to 5 tables
* chairs: beside tables, up to two per table
* cup, bread (up to two each), kettle, coffee machine, towel (at most one each):
  on table tops, inset 0.05 m from the edge
* mop, floor scrubber, stain: free floor at least 0.6 m from other floor objects
* curtains on the east/west walls, light switches on the north/south walls,
  the air conditioner high on the north wall
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .simworld.scene import (
    CATEGORIES,
    ObjectInstance,
    SceneValidationError,
    WorldScene,
    make_object,
    scene_from_dict,
    validate_scene,
)
from .vocab import (
    AFFORDANCES,
    DISTRACTORS,
    QUESTION_TEMPLATES,
    TEMPLATE_QTYPE,
    YES_NO_TEMPLATES,
    display,
)

DEFAULT_BOUNDS = (0.0, 0.0, 8.0, 6.0)
TABLE_SLOTS_X = (1.4, 3.2, 5.0, 6.8)
TABLE_SLOTS_Y = (1.4, 3.0, 4.6)
TABLE_HALF = (0.45, 0.45, 0.375)
CHAIR_HALF = (0.22, 0.22, 0.45)
ITEM_HALF = {
    "cup": (0.05, 0.05, 0.05),
    "bread": (0.1, 0.06, 0.04),
    "kettle": (0.1, 0.1, 0.12),
    "coffee_machine": (0.18, 0.18, 0.2),
    "towel": (0.12, 0.08, 0.01),
}
FLOOR_HALF = {"mop": (0.1, 0.1, 0.6), "floor_scrubber": (0.25, 0.2, 0.3), "stain": (0.2, 0.15, 0.002)}
TABLE_ITEMS = tuple(ITEM_HALF)
# comparing questions whose two distances differ by less than this are rejected
MIN_DISTANCE_GAP = 0.05
BALANCE_RANGE = (0.4, 0.6)


class OracleError(ValueError):
    pass


class DatasetBalanceError(RuntimeError):
    def __init__(self, template_id: int, fraction: float):
        self.template_id = template_id
        self.fraction = fraction
        super().__init__(f"template {template_id}: yes-fraction {fraction:.3f} outside {BALANCE_RANGE}")


# -- scene randomization -----------------------------------------------------

def _overlap(a_pos, a_half, b: ObjectInstance, margin: float) -> bool:
    return (abs(a_pos[0] - b.position[0]) < a_half[0] + b.half_extents[0] + margin
            and abs(a_pos[1] - b.position[1]) < a_half[1] + b.half_extents[1] + margin)


def randomize_scene(seed: int, catalog=CATEGORIES, bounds=DEFAULT_BOUNDS) -> WorldScene:
    """Seeded cafe layout using only categories in ``catalog``.

    When tables and table items are both in the catalog, at least two tables
    carry two or more items.
    """
    catalog = set(catalog)
    if not catalog:
        raise ValueError("catalog must not be empty")
    unknown = catalog - set(CATEGORIES)
    if unknown:
        raise ValueError(f"unknown categories: {sorted(unknown)}")
    rng = random.Random(seed)
    xmin, ymin, xmax, ymax = (float(b) for b in bounds)
    sx, sy = (xmax - xmin) / 8.0, (ymax - ymin) / 6.0
    specs: list[tuple] = []  # (category, position, half, surface index or None, state)
    placed: list[ObjectInstance] = []

    def add(cat, pos, half, surface=None, **state):
        specs.append((cat, tuple(pos), tuple(half), surface, state))
        placed.append(make_object(len(specs), cat, pos, half))

    tables: list[int] = []
    if "table" in catalog:
        slots = [(x, y) for x in TABLE_SLOTS_X for y in TABLE_SLOTS_Y]
        for x, y in rng.sample(slots, rng.randint(3, 5)):
            pos = (xmin + x * sx + rng.uniform(-0.15, 0.15), ymin + y * sy + rng.uniform(-0.15, 0.15), TABLE_HALF[2])
            add("table", pos, TABLE_HALF)
            tables.append(len(specs) - 1)

    if "chair" in catalog:
        for ti in tables:
            tx, ty = specs[ti][1][:2]
            sides = rng.sample([(-1, 0), (1, 0), (0, -1), (0, 1)], rng.randint(0, 2))
            for dx, dy in sides:
                off = TABLE_HALF[0] + CHAIR_HALF[0] + 0.08
                pos = (tx + dx * off, ty + dy * off, CHAIR_HALF[2])
                if not (xmin + 0.3 < pos[0] < xmax - 0.3 and ymin + 0.3 < pos[1] < ymax - 0.3):
                    continue
                if any(_overlap(pos, CHAIR_HALF, o, 0.05) for o in placed if o.category != "table"):
                    continue
                if any(_overlap(pos, CHAIR_HALF, o, 0.0) for o in placed if o.category == "table"):
                    continue
                add("chair", pos, CHAIR_HALF)

    if tables:
        items = []
        for cat in ("cup", "bread"):
            if cat in catalog:
                items += [cat] * rng.randint(0, 2)
        for cat in ("kettle", "coffee_machine", "towel"):
            if cat in catalog and rng.random() < 0.5:
                items.append(cat)
        extra = [c for c in ("cup", "bread") if c in catalog]
        while len(tables) >= 2 and len(items) < 4 and extra:
            c = rng.choice(extra)
            items.append(c)
            if items.count(c) >= 2:
                extra.remove(c)
        rng.shuffle(items)
        # the first two tables get two items each so location questions exist
        loaded = rng.sample(tables, min(2, len(tables)))
        order = [t for t in loaded for _ in range(2)]
        assign = order + [rng.choice(tables) for _ in range(max(0, len(items) - len(order)))]
        per_table: dict[int, list[ObjectInstance]] = {t: [] for t in tables}
        for cat, ti in zip(items, assign):
            half = ITEM_HALF[cat]
            t_pos, t_half = specs[ti][1], specs[ti][2]
            for _ in range(50):
                px = t_pos[0] + rng.uniform(-1, 1) * (t_half[0] - half[0] - 0.05)
                py = t_pos[1] + rng.uniform(-1, 1) * (t_half[1] - half[1] - 0.05)
                if not any(_overlap((px, py), half, o, 0.02) for o in per_table[ti]):
                    break
            else:
                continue
            pos = (px, py, 2 * t_half[2] + half[2])
            specs.append((cat, pos, half, ti, {}))
            per_table[ti].append(make_object(len(specs), cat, pos, half))

    for cat, p in (("mop", 0.5), ("floor_scrubber", 0.5), ("stain", 0.5)):
        if cat not in catalog or rng.random() >= p:
            continue
        half = FLOOR_HALF[cat]
        for _ in range(200):
            pos = (rng.uniform(xmin + 0.3, xmax - 0.3), rng.uniform(ymin + 0.3, ymax - 0.3), half[2])
            if not any(_overlap(pos, half, o, 0.6) for o in placed):
                add(cat, pos, half)
                break

    if "curtain" in catalog:
        for side in rng.sample([0, 1], rng.randint(0, 2)):
            x = xmin + 0.03 if side == 0 else xmax - 0.03
            add("curtain", (x, rng.uniform(ymin + 1.2, ymax - 1.2), 1.3), (0.03, 0.8, 1.2))
    if "light_switch" in catalog:
        for side in rng.sample([0, 1], rng.randint(1, 2)):
            y = ymin + 0.02 if side == 0 else ymax - 0.02
            add("light_switch", (rng.uniform(xmin + 0.5, xmax - 0.5), y, 1.2), (0.05, 0.02, 0.08))
    if "air_conditioner" in catalog and rng.random() < 0.5:
        add("air_conditioner", (rng.uniform(xmin + 1.0, xmax - 1.0), ymax - 0.15, 2.0), (0.5, 0.15, 0.15))
    if not specs:
        # a catalog of on-table items alone still yields a valid, empty cafe
        return WorldScene((xmin, ymin, xmax, ymax), [])

    ids = rng.sample(range(1, len(specs) + 1), len(specs))
    objects = []
    for k, (cat, pos, half, surface, state) in enumerate(specs):
        sid = ids[surface] if surface is not None else None
        objects.append(make_object(ids[k], cat, pos, half, surface_of=sid, **state))
    objects.sort(key=lambda o: o.id)
    scene = WorldScene((xmin, ymin, xmax, ymax), objects)
    validate_scene(scene)
    return scene


# -- answer oracle -----------------------------------------------------------

def _obj(scene: WorldScene, oid: int) -> ObjectInstance:
    try:
        return scene.get(int(oid))
    except KeyError:
        raise OracleError(f"object {oid} is not in the scene") from None


def _dist(a: ObjectInstance, b: ObjectInstance) -> float:
    return float(math.dist(a.position, b.position))


def table_mates(scene: WorldScene, oid: int) -> list[ObjectInstance]:
    x = _obj(scene, oid)
    if x.surface_of is None:
        return []
    return [o for o in scene.objects if o.surface_of == x.surface_of and o.id != x.id]


def answer_oracle(scene: WorldScene, qtype: str, bindings: dict) -> str:
    """Ground-truth answer from scene geometry.

    ``bindings`` holds ``template_id`` plus ``objects`` (ids), ``category``
    or ``activity`` as the template needs.
    """
    tid = int(bindings["template_id"])
    if TEMPLATE_QTYPE.get(tid) != qtype:
        raise OracleError(f"template {tid} is not a {qtype} question")
    objs = [_obj(scene, i) for i in bindings.get("objects", [])]
    if tid == 1:
        if len(objs) != 1:
            raise OracleError("template 1 binds one object")
        names = sorted({display(o.category) for o in table_mates(scene, objs[0].id)})
        return " and ".join(names) if names else "nothing"
    if tid == 2:
        if len(objs) != 2:
            raise OracleError("template 2 binds two objects")
        a, b = objs
        return "Yes" if a.surface_of is not None and a.surface_of == b.surface_of else "No"
    if tid == 3:
        if len(objs) != 3:
            raise OracleError("template 3 binds three objects")
        a, b, c = objs
        return "Yes" if _dist(a, b) < _dist(a, c) else "No"
    if tid == 4:
        cat = bindings["category"]
        return "Yes" if scene.of_category(cat) else "No"
    if tid == 5:
        act = bindings["activity"]
        if act not in AFFORDANCES:
            raise OracleError(f"unknown activity {act!r}")
        return "Yes" if any(scene.of_category(c) for c in sorted(AFFORDANCES[act])) else "No"
    raise OracleError(f"unknown template {tid}")


# -- question instantiation --------------------------------------------------

def _unique(scene: WorldScene, pool=None) -> list[ObjectInstance]:
    counts: dict[str, int] = {}
    for o in scene.objects:
        counts[o.category] = counts.get(o.category, 0) + 1
    return [o for o in scene.objects if counts[o.category] == 1 and (pool is None or o.category in pool)]


def question_options(scene: WorldScene, template_id: int) -> list[tuple[str, dict]]:
    """Every distinct (question, bindings) this template admits on ``scene``."""
    out = []
    if template_id == 1:
        for x in _unique(scene, TABLE_ITEMS):
            if table_mates(scene, x.id):
                out.append((QUESTION_TEMPLATES[1].format(obj=display(x.category)), {"objects": [x.id]}))
    elif template_id == 2:
        items = _unique(scene, TABLE_ITEMS)
        for a in items:
            for b in items:
                if a.id != b.id:
                    q = QUESTION_TEMPLATES[2].format(obj1=display(a.category), obj2=display(b.category))
                    out.append((q, {"objects": [a.id, b.id]}))
    elif template_id == 3:
        objs = _unique(scene)
        for a in objs:
            for b in objs:
                for c in objs:
                    if len({a.id, b.id, c.id}) < 3:
                        continue
                    if abs(_dist(a, b) - _dist(a, c)) < MIN_DISTANCE_GAP:
                        continue
                    q = QUESTION_TEMPLATES[3].format(obj1=display(a.category), obj2=display(b.category),
                                                     obj3=display(c.category))
                    out.append((q, {"objects": [a.id, b.id, c.id]}))
    elif template_id == 4:
        for cat in sorted(CATEGORIES):
            out.append((QUESTION_TEMPLATES[4].format(obj=display(cat)), {"category": cat}))
        for name in DISTRACTORS:
            out.append((QUESTION_TEMPLATES[4].format(obj=name), {"category": name.replace(" ", "_")}))
    elif template_id == 5:
        for act in sorted(AFFORDANCES):
            out.append((QUESTION_TEMPLATES[5].format(activity=act), {"activity": act}))
    for q, b in out:
        b["template_id"] = template_id
    return out


def instantiable_templates(scene: WorldScene, per_template: int = 1) -> dict[int, bool]:
    """Whether each template has at least ``per_template`` distinct questions on ``scene``."""
    return {t: len({q for q, _ in question_options(scene, t)}) >= per_template for t in QUESTION_TEMPLATES}


@dataclass(frozen=True)
class QAItem:
    scene_id: str
    scene: dict
    qtype: str
    template_id: int
    question: str
    answer: str
    support: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "scene": self.scene,
            "type": self.qtype,
            "template_id": self.template_id,
            "question": self.question,
            "answer": self.answer,
            "support": self.support,
        }

    def replay(self) -> str:
        return answer_oracle(scene_from_dict(self.scene), self.qtype, self.support["bindings"])


def _support(scene: WorldScene, bindings: dict) -> dict:
    sup = {"bindings": bindings}
    ids = bindings.get("objects", [])
    if bindings["template_id"] in (1, 2):
        sup["surfaces"] = [scene.get(i).surface_of for i in ids]
        if bindings["template_id"] == 1:
            sup["table_mates"] = sorted(o.id for o in table_mates(scene, ids[0]))
    elif bindings["template_id"] == 3:
        a, b, c = (scene.get(i) for i in ids)
        sup["distances"] = [round(_dist(a, b), 6), round(_dist(a, c), 6)]
    elif bindings["template_id"] == 4:
        sup["matches"] = sorted(o.id for o in scene.of_category(bindings["category"]))
    elif bindings["template_id"] == 5:
        cats = AFFORDANCES[bindings["activity"]]
        sup["matches"] = sorted(o.id for o in scene.objects if o.category in cats)
    return sup


def scene_questions(scene: WorldScene, scene_id: str, per_template: int, rng: random.Random,
                    tally: dict | None = None) -> list[QAItem]:
    """``per_template`` distinct questions per template.

    For yes/no templates each pick prefers whichever answer is behind in
    ``tally`` (template id -> {"Yes": n, "No": n}), which is updated in place.
    """
    tally = {} if tally is None else tally
    qtype_items = []
    doc = scene.to_json()
    for tid in sorted(QUESTION_TEMPLATES):
        qtype = TEMPLATE_QTYPE[tid]
        options = question_options(scene, tid)
        rng.shuffle(options)
        answered = [(q, b, answer_oracle(scene, qtype, b)) for q, b in options]
        used: set[str] = set()
        for k in range(per_template):
            pool = [x for x in answered if x[0] not in used]
            if tid in YES_NO_TEMPLATES:
                t = tally.setdefault(tid, {"Yes": 0, "No": 0})
                want = "Yes" if t["Yes"] <= t["No"] else "No"
                pick = next((x for x in pool if x[2] == want), None) or (pool[0] if pool else None)
                if pick is not None:
                    t[pick[2]] += 1
            else:
                pick = pool[0] if pool else None
            if pick is None:
                raise OracleError(f"template {tid} has fewer than {per_template} questions on {scene_id}")
            q, b, ans = pick
            used.add(q)
            qtype_items.append(QAItem(scene_id, doc, qtype, tid, q, ans, _support(scene, b)))
    return qtype_items


def generate_dataset(seeds: int = 70, per_template: int = 3, base_seed: int = 0, catalog=CATEGORIES) -> list[QAItem]:
    """``seeds * 5 * per_template`` items, one scene per seed.

    A seed whose layout cannot host every template is re-drawn with a derived
    seed.  Raises :class:`DatasetBalanceError` if a yes/no template ends up
    outside the balance range.
    """
    items: list[QAItem] = []
    tally: dict = {}
    for s in range(seeds):
        for attempt in range(100):
            scene_seed = (base_seed + s) * 1000 + attempt
            try:
                scene = randomize_scene(scene_seed, catalog)
            except SceneValidationError:
                continue
            if all(instantiable_templates(scene, per_template).values()):
                break
        else:
            raise OracleError(f"no instantiable layout for seed {base_seed + s}")
        rng = random.Random(scene_seed)
        items.extend(scene_questions(scene, f"scene_{base_seed + s:03d}", per_template, rng, tally))
    for tid in YES_NO_TEMPLATES:
        answers = [it.answer for it in items if it.template_id == tid]
        if answers:
            frac = answers.count("Yes") / len(answers)
            if not BALANCE_RANGE[0] <= frac <= BALANCE_RANGE[1]:
                raise DatasetBalanceError(tid, frac)
    return items


def write_dataset(items) -> bytes:
    return (json.dumps({"items": [it.to_json() for it in items]}, sort_keys=True) + "\n").encode("utf-8")


def read_dataset(data: bytes | str) -> list[QAItem]:
    doc = json.loads(data)
    out = []
    for d in doc["items"]:
        out.append(QAItem(d["scene_id"], d["scene"], d["type"], int(d["template_id"]), d["question"],
                          d["answer"], d.get("support", {})))
    return out
