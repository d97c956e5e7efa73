"""Regenerates the frozen test fixtures in this directory.

The expected-value files (*_oracle.csv, *_expected.txt) are produced here from
the rules written out longhand below, independently of the C++ code.
"""
import csv
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
HEADER = ["id", "image_path", "text", "image_label", "text_label", "joint_label"]
P, N, U = "positive", "negative", "neutral"


def write_manifest(name, rows):
    with open(os.path.join(HERE, name), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)


def joint_pairs():
    # 30 samples covering all nine (image, text) pairs.
    plan = [(P, P, 4), (P, N, 3), (P, U, 3), (N, P, 3), (N, N, 4), (N, U, 3), (U, P, 3), (U, N, 3), (U, U, 4)]
    rows = []
    k = 0
    for img, txt, count in plan:
        for _ in range(count):
            rows.append([f"jp{k:02d}", "", f"caption {k}", img, txt, ""])
            k += 1
    write_manifest("joint_pairs.csv", rows)

    # Oracle tables, written out per pair by hand.
    strict = {(P, P): P, (N, N): N, (U, U): U}
    keep_polar = {(P, P): P, (N, N): N, (U, U): U, (P, U): P, (U, P): P, (N, U): N, (U, N): N}
    for fname, table in (("joint_oracle_strict_equal.csv", strict), ("joint_oracle_keep_polar.csv", keep_polar)):
        with open(os.path.join(HERE, fname), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["id", "joint_label"])
            for r in rows:
                key = (r[3], r[4])
                if key in table:
                    w.writerow([r[0], table[key]])


def english_mix():
    english = [
        "families belong together",
        "the kid genin",
        "the bucket list bora bora",
        "we love this beautiful day at the beach",
        "stop the war now",
        "my dog is the best friend i have",
        "happy birthday to my little sister",
        "police report a fire in the city",
        "this is what hope looks like",
        "never give up on your dream",
    ]
    other = [
        "la familia siempre unida para siempre",
        "nous sommes ensemble pour toujours",
        "wir sind zusammen stark heute abend",
        "selamat pagi semua teman teman",
        "buongiorno amici miei carissimi",
    ]
    rows = []
    for i, t in enumerate(english):
        rows.append([f"en{i}", "", t, U, U, ""])
    for i, t in enumerate(other):
        rows.append([f"xx{i}", "", t, U, U, ""])
    write_manifest("english_mix.csv", rows)
    with open(os.path.join(HERE, "english_mix_expected.txt"), "w") as f:
        for i in range(len(english)):
            f.write(f"en{i}\n")


def single_object():
    # 50 samples; per-sample COCO and VG detection counts fixed by hand below.
    coco_counts = [0, 1, 2, 0, 1, 3, 0, 0, 1, 2,
                   4, 1, 0, 0, 2, 1, 0, 5, 1, 0,
                   2, 0, 1, 3, 0, 0, 1, 2, 0, 0,
                   1, 0, 6, 2, 0, 1, 0, 3, 0, 2,
                   0, 0, 2, 0, 1, 0, 2, 0, 3, 0]
    vg_counts = [(i * 7) % 5 for i in range(50)]
    assert sum(1 for c in coco_counts if c == 1) == 11
    names = ["person", "dog", "cat", "car", "tree", "sky"]
    rows = []
    with open(os.path.join(HERE, "single_object_cache.jsonl"), "w") as f:
        for i in range(50):
            sid = f"so{i:02d}"
            rows.append([sid, "", f"text {i}", P, P, P])
            for source, n in (("coco", coco_counts[i]), ("vg", vg_counts[i])):
                dets = [{"name": names[(i + j) % len(names)], "confidence": 0.9,
                         "box": [0, 0, 10, 10]} for j in range(n)]
                f.write(json.dumps({"sample_id": sid, "source": source, "threshold": 0.5,
                                    "detections": dets}) + "\n")
    write_manifest("single_object.csv", rows)
    with open(os.path.join(HERE, "single_object_expected.txt"), "w") as f:
        for i in range(50):
            if coco_counts[i] == 1:
                f.write(f"so{i:02d}\n")


def histogram():
    # 100 samples shaped like the SIMPSoN row: 36 with none, 28 with one, ...
    plan = [36, 28, 18, 9, 6, 3]
    counts = []
    for k, n in enumerate(plan):
        counts += [k] * n
    rng = random.Random(7)
    rng.shuffle(counts)
    with open(os.path.join(HERE, "histogram_cache.jsonl"), "w") as f:
        for i, n in enumerate(counts):
            dets = [{"name": "object", "confidence": 0.8, "box": [1, 2, 3, 4]} for _ in range(n)]
            f.write(json.dumps({"sample_id": f"h{i:03d}", "source": "coco", "threshold": 0.7,
                                "detections": dets}) + "\n")
    with open(os.path.join(HERE, "histogram_expected.csv"), "w") as f:
        f.write("objects," + ",".join(str(k) for k in range(len(plan))) + "\n")
        f.write("coco," + ",".join(f"{100.0 * n / 100:.2f}" for n in plan) + "\n")


if __name__ == "__main__":
    joint_pairs()
    english_mix()
    single_object()
    histogram()
