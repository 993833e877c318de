"""Regenerates the landmark / detector-response fixtures used by the tests."""
import json
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def face_template():
    pts = []
    # Jaw contour, 33 points: (0, .35) -> chin (.5, 1) -> (1, .35).
    for i in range(33):
        t = math.pi * i / 32
        pts.append((0.5 - 0.5 * math.cos(t), 0.35 + 0.65 * math.sin(t)))
    # Brows, 9 points each; the middle point of the left brow touches y = 0.
    for cx in (0.28, 0.72):
        for i in range(9):
            u = (i - 4) / 4
            pts.append((cx + 0.16 * u, 0.08 * u * u + (0.0 if cx < 0.5 else 0.01)))
    # Eyes, 8 points each, plus pupils.
    for cx in (0.3, 0.7):
        for i in range(8):
            t = 2 * math.pi * i / 8
            pts.append((cx + 0.1 * math.cos(t), 0.3 + 0.04 * math.sin(t)))
        pts.append((cx, 0.3))
        pts.append((cx + 0.01, 0.31))
    # Nose, 15 points.
    for i in range(15):
        pts.append((0.5 + 0.06 * math.sin(i), 0.35 + 0.3 * i / 14))
    # Mouth, 20 points.
    for i in range(20):
        t = 2 * math.pi * i / 20
        pts.append((0.5 + 0.18 * math.cos(t), 0.8 + 0.06 * math.sin(t)))
    assert len(pts) == 106, len(pts)
    return pts


def place(template, x, y, w, h, rng):
    out = []
    for (u, v) in template:
        ju = rng.uniform(-0.003, 0.003) if 0.01 < u < 0.99 else 0.0
        jv = rng.uniform(-0.003, 0.003) if 0.01 < v < 0.99 else 0.0
        out.append([round(x + (u + ju) * w, 3), round(y + (v + jv) * h, 3)])
    return out


def dump(name, doc):
    with open(os.path.join(HERE, name), "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def main():
    rng = random.Random(106)
    tpl = face_template()
    face_a = place(tpl, 60.25, 80.5, 200.0, 230.0, rng)
    face_b = place(tpl, 420.0, 100.0, 80.0, 90.0, rng)
    dump("landmarks_A.json", face_a)
    dump("two_faces.json", [
        {"landmarks": face_b, "confidence": 0.88, "yaw": -20.0},
        {"landmarks": face_a, "confidence": 0.97, "yaw": 10.0, "bbox": [50, 70, 220, 250]},
    ])
    dump("tiny_face.json", [{"landmarks": place(tpl, 300.0, 50.0, 8.0, 8.0, rng), "confidence": 0.6}])
    dump("yaw46.json", [{"landmarks": place(tpl, 200.0, 150.0, 100.0, 110.0, rng), "confidence": 0.95, "yaw": 46.0}])
    dump("wrong_count.json", [{"landmarks": place(tpl, 100.0, 100.0, 100.0, 100.0, rng)[:68], "confidence": 0.9}])
    dump("no_faces.json", [])


if __name__ == "__main__":
    main()
