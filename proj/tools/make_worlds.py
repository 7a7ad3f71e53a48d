#!/usr/bin/env python3
"""Generate the bundled house-like grid worlds under worlds/.

Each world is a P5 graymap of raw costs (0 free, 254 wall) with a .meta
sidecar and one scenario JSON. Layouts are written in meters and rasterized
at 0.1 m per cell. Re-running the script reproduces the files byte for byte.
"""

import json
import pathlib

RES = 0.1
WALL = 254
T = 0.2  # wall thickness, m

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "worlds"


class House:
    def __init__(self, w, h):
        self.w = round(w / RES)
        self.h = round(h / RES)
        self.cost = [[0] * self.w for _ in range(self.h)]  # [row][col], row 0 at y = 0
        self.rect(0, 0, w, T)
        self.rect(0, h - T, w, h)
        self.rect(0, 0, T, h)
        self.rect(w - T, 0, w, h)

    def rect(self, x0, y0, x1, y1, value=WALL):
        for r in range(round(y0 / RES), round(y1 / RES)):
            for c in range(round(x0 / RES), round(x1 / RES)):
                if 0 <= r < self.h and 0 <= c < self.w:
                    self.cost[r][c] = value

    def hwall(self, y, x0, x1, doors=()):
        """Horizontal wall centered on y from x0 to x1, doors as (x_start, width)."""
        self._wall(x0, x1, doors, lambda a, b: self.rect(a, y - T / 2, b, y + T / 2))

    def vwall(self, x, y0, y1, doors=()):
        self._wall(y0, y1, doors, lambda a, b: self.rect(x - T / 2, a, x + T / 2, b))

    @staticmethod
    def _wall(a0, a1, doors, draw):
        cuts = sorted(doors)
        pos = a0
        for start, width in cuts:
            if start > pos:
                draw(pos, start)
            pos = start + width
        if pos < a1:
            draw(pos, a1)

    def save(self, stem):
        pgm = OUT / f"{stem}.pgm"
        rows = [bytes(self.cost[r]) for r in reversed(range(self.h))]  # image row 0 = top
        pgm.write_bytes(f"P5\n{self.w} {self.h}\n255\n".encode() + b"".join(rows))
        (OUT / f"{stem}.meta").write_text(f"resolution: {RES}\norigin_x: 0.0\norigin_y: 0.0\nlethal_min: 253\n")


def scenario(stem, goal, start, objects, seed):
    return {
        "name": stem,
        "map": f"{stem}.pgm",
        "start": list(start),
        "goal_category": goal,
        "objects": [{"label": l, "position": list(p)} for l, p in objects],
        "seeds": {"episode": seed},
        "perception": {"mode": "mock", "tpr": 1.0, "fpr": 0.0, "catch_rate": 1.0, "accept_rate": 1.0,
                       "max_reassessments": 2},
        "planner": "medial",
        "max_steps": 500,
        "cooc": "../data/cooccurrence.csv",
    }


def worlds():
    # Living room with the television on the far wall; the remote sits on the
    # coffee table in front of it. The agent wakes up in the bedroom.
    h = House(10, 8)
    h.vwall(4.0, 0, 8, doors=[(5.0, 1.0)])
    h.hwall(3.5, 0, 4.0, doors=[(1.5, 1.0)])
    yield h, scenario("living_room_remote", "remote", (1.5, 1.5, 0.0),
                      [("television", (9.4, 6.5)), ("sofa", (6.0, 2.0)), ("coffee table", (8.0, 5.0)),
                       ("remote", (8.2, 5.6)), ("bed", (1.0, 6.5))], 11)

    # Kitchen in the top right; the trash can stands next to the refrigerator.
    h = House(10, 8)
    h.hwall(4.0, 0, 10, doors=[(2.0, 1.0), (7.5, 1.0)])
    h.vwall(5.0, 4.0, 8, doors=[(6.0, 1.0)])
    yield h, scenario("kitchen_trash_can", "trash can", (1.0, 1.0, 0.0),
                      [("refrigerator", (9.4, 7.4)), ("sink", (7.0, 7.5)), ("trash can", (8.8, 6.8)),
                       ("sofa", (2.0, 6.0)), ("television", (4.5, 2.0))], 12)

    # Goal right next to the start.
    h = House(6, 5)
    h.vwall(3.0, 0, 5, doors=[(2.0, 1.0)])
    yield h, scenario("mug_next_to_start", "mug", (1.0, 2.5, 0.0),
                      [("mug", (2.3, 2.6)), ("dining table", (2.2, 4.0)), ("bed", (5.0, 1.0))], 13)

    # Bathroom down a corridor.
    h = House(12, 6)
    h.hwall(2.0, 0, 12, doors=[(1.0, 1.0), (6.0, 1.0), (10.0, 1.0)])
    h.vwall(4.0, 2.0, 6, doors=[])
    h.vwall(8.0, 2.0, 6, doors=[])
    yield h, scenario("bathroom_trash_can", "trash can", (5.0, 1.0, 3.14159),
                      [("bathroom", (10.0, 4.5)), ("sink", (11.4, 5.4)), ("trash can", (11.2, 3.0)),
                       ("bed", (2.0, 5.0)), ("desk", (6.0, 5.0))], 14)

    # Bedroom with the pillow on the bed.
    h = House(9, 9)
    h.hwall(4.5, 0, 9, doors=[(3.8, 1.2)])
    h.vwall(4.5, 4.5, 9, doors=[(6.0, 1.0)])
    yield h, scenario("bedroom_pillow", "pillow", (2.0, 2.0, 1.5708),
                      [("bed", (7.5, 7.5)), ("pillow", (8.0, 8.2)), ("sofa", (2.0, 7.0)),
                       ("refrigerator", (8.0, 1.0))], 15)

    # Office with a desk and a laptop, off a living room.
    h = House(11, 7)
    h.vwall(4.0, 0, 7, doors=[(1.0, 1.0)])
    h.vwall(7.5, 0, 7, doors=[(5.0, 1.0)])
    yield h, scenario("office_laptop", "laptop", (2.0, 5.0, 0.0),
                      [("desk", (10.0, 6.0)), ("laptop", (10.2, 5.4)), ("sofa", (5.5, 3.5)),
                       ("bookshelf", (8.0, 1.0))], 16)

    # Towel in a small bathroom behind two doors.
    h = House(10, 10)
    h.hwall(5.0, 0, 10, doors=[(4.5, 1.0)])
    h.vwall(5.0, 5.0, 10, doors=[(8.0, 1.0)])
    h.vwall(5.0, 0, 5.0, doors=[(1.0, 1.0)])
    yield h, scenario("bathroom_towel", "towel", (8.0, 2.0, 3.14159),
                      [("sink", (1.0, 9.0)), ("towel", (1.4, 8.2)), ("bathroom", (2.5, 7.5)),
                       ("bed", (8.0, 8.0)), ("desk", (2.0, 2.0))], 17)

    # Book on the bookshelf across an open-plan room with a rug of moderate cost.
    h = House(12, 8)
    h.rect(3.0, 3.0, 6.0, 5.0, value=40)
    h.hwall(4.0, 8.0, 12, doors=[(9.5, 1.0)])
    yield h, scenario("office_book", "book", (1.0, 1.0, 0.7854),
                      [("bookshelf", (11.4, 7.0)), ("book", (10.8, 6.8)), ("sofa", (4.0, 7.0)),
                       ("desk", (11.0, 1.0))], 18)

    # Mug in a kitchen at the far end of an L-shaped corridor.
    h = House(10, 10)
    h.hwall(2.0, 0, 8.0, doors=[])
    h.vwall(8.0, 2.0, 10, doors=[(8.5, 1.0)])
    h.hwall(6.0, 0, 8.0, doors=[(3.0, 1.0)])
    yield h, scenario("kitchen_mug", "mug", (1.0, 1.0, 0.0),
                      [("coffee machine", (1.0, 9.4)), ("mug", (1.6, 9.0)), ("kitchen", (4.0, 8.0)),
                       ("refrigerator", (7.5, 9.5)), ("bed", (4.0, 4.0))], 19)

    # Plant by the window of a living room, with clutter to walk around.
    h = House(10, 8)
    h.vwall(5.0, 0, 8, doors=[(3.5, 1.2)])
    h.rect(2.0, 5.0, 3.0, 6.0)
    h.rect(7.0, 2.0, 8.0, 3.0)
    yield h, scenario("living_room_plant", "plant", (1.0, 1.0, 0.0),
                      [("window", (9.5, 7.5)), ("plant", (9.0, 7.0)), ("sofa", (7.0, 5.5)),
                       ("television", (6.0, 1.0))], 20)


COOC = """\
# goal,context,affinity
remote,television,0.9
remote,sofa,0.8
remote,living room,0.8
remote,coffee table,0.7
trash can,kitchen,0.7
trash can,bathroom,0.7
trash can,sink,0.5
trash can,refrigerator,0.5
mug,kitchen,0.8
mug,coffee machine,0.9
mug,refrigerator,0.5
mug,dining table,0.6
pillow,bed,0.9
pillow,bedroom,0.8
pillow,sofa,0.5
laptop,desk,0.9
laptop,office,0.8
towel,bathroom,0.9
towel,sink,0.6
plant,living room,0.5
plant,window,0.6
book,bookshelf,0.9
book,office,0.6
book,bedroom,0.4
"""


def main():
    OUT.mkdir(exist_ok=True)
    for house, sc in worlds():
        house.save(sc["name"])
        (OUT / f"{sc['name']}.json").write_text(json.dumps(sc, indent=2) + "\n")
    (ROOT / "data").mkdir(exist_ok=True)
    (ROOT / "data" / "cooccurrence.csv").write_text(COOC)


if __name__ == "__main__":
    main()
