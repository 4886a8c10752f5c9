"""Regenerates the bundled pipeline fixture tree (stdlib only, seeded)."""

import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent / "pipeline"
SPANS = {"0-10": (0, 9), "10-18": (10, 18), "19-35": (19, 35), "36-50": (36, 50), "51+": (51, 90)}
GROUP_INDEX = {g: i for i, g in enumerate(SPANS)}
DIM = 8
SIDE = 24

rng = random.Random(20240601)


def cells():
    yield "fake", "19-35", "celeb-df", 30
    yield "fake", "19-35", "faceforensics++", 50
    yield "fake", "36-50", "celeb-df", 10
    yield "fake", "36-50", "faceforensics++", 14
    yield "real", "19-35", "celeb-df", 25
    yield "real", "19-35", "faceforensics++", 30
    yield "real", "36-50", "celeb-df", 8
    yield "real", "36-50", "faceforensics++", 9
    yield "real", "51+", "faceforensics++", 2
    for group, n in [("0-10", 40), ("10-18", 30), ("19-35", 60), ("36-50", 40), ("51+", 40)]:
        yield "real", group, "utkface", n


def rows_for(label, group, source, n, frames_per_video):
    lo, hi = SPANS[group]
    tag = f"{source}-{label}-{group}"
    for i in range(n):
        yield (f"{tag}-{i:03d}", f"{tag}-v{i // frames_per_video:02d}", source, label, lo + i % (hi - lo + 1), group)


def write_manifest(path, rows):
    lines = ["frame_id,video_id,source,label,estimated_age,age_group"]
    lines += [",".join(str(x) for x in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def feature(label, group):
    sign = 1.0 if label == "fake" else -1.0
    shift = 0.5 * sign
    age = GROUP_INDEX[group] / 4.0
    return [shift + rng.gauss(0, 1) for _ in range(4)] + [age + rng.gauss(0, 1) for _ in range(4)]


def image(base=None, amp=0):
    if base is None:
        return bytes(rng.randrange(256) for _ in range(SIDE * SIDE))
    return bytes(min(255, max(0, p + rng.randint(-amp, amp))) for p in base)


def smooth_reference(phase):
    return bytes(
        int(127 + 100 * math.sin((x + phase) / 4.0) * math.cos((y - phase) / 5.0))
        for y in range(SIDE)
        for x in range(SIDE)
    )


def write_pgm(path, pixels):
    path.write_bytes(f"P5\n{SIDE} {SIDE}\n255\n".encode() + pixels)


def main():
    ROOT.mkdir(parents=True, exist_ok=True)
    (ROOT / "images").mkdir(exist_ok=True)

    base_rows = [r for c in cells() for r in rows_for(*c, frames_per_video=5)]
    write_manifest(ROOT / "manifest.csv", base_rows)

    # synthetic videos: (group, videos, frames per video, failing video indices)
    synth_spec = [("0-10", 10, 6, {3}), ("10-18", 8, 6, {0}), ("36-50", 5, 6, set()), ("51+", 9, 6, {2, 7})]
    synth_rows, pairs = [], ["reference,generated"]
    for k, (group, videos, per, failing) in enumerate(synth_spec):
        ref = smooth_reference(3 * k)
        ref_name = f"images/ref-{GROUP_INDEX[group]}.pgm"
        write_pgm(ROOT / ref_name, ref)
        lo, hi = SPANS[group]
        for v in range(videos):
            vid = f"synthetic-fake-{group}-v{v:02d}"
            gen = image() if v in failing else image(ref, amp=25)
            write_pgm(ROOT / "images" / f"{vid}.pgm", gen)
            pairs.append(f"{ref_name},images/{vid}.pgm")
            for f in range(per):
                i = v * per + f
                synth_rows.append((f"{vid}-f{f}", vid, "synthetic", "fake", lo + i % (hi - lo + 1), group))
    write_manifest(ROOT / "synthetic_manifest.csv", synth_rows)
    (ROOT / "pairs.csv").write_text("\n".join(pairs) + "\n")

    feats = []
    for r in base_rows + synth_rows:
        vec = feature(r[3], r[5])
        feats.append(",".join([r[0], str(DIM)] + [f"{x:.6f}" for x in vec] + [r[3]]))
    (ROOT / "features.csv").write_text("\n".join(feats) + "\n")

    def descriptor(name, emb):
        attrs = [rng.uniform(-40, 40), rng.uniform(-20, 20), rng.uniform(0.2, 0.8), rng.uniform(0, 1)]
        return ",".join([name, str(len(emb))] + [f"{x:.6f}" for x in emb] + [f"{a:.4f}" for a in attrs])

    targets, sources = [], []
    protos = [[rng.gauss(0, 1) for _ in range(16)] for _ in range(10)]
    for i, p in enumerate(protos):
        targets.append(descriptor(f"celeb-df-fake-19-35-v{i:02d}", p))
    utk = [r for r in base_rows if r[2] == "utkface"][::20]
    for i, r in enumerate(utk):
        if i % 3 == 2:
            emb = [rng.gauss(0, 1) for _ in range(16)]
        else:
            emb = [x + rng.gauss(0, 0.4) for x in protos[i % len(protos)]]
        sources.append(descriptor(r[0], emb))
    (ROOT / "targets.csv").write_text("\n".join(targets) + "\n")
    (ROOT / "sources.csv").write_text("\n".join(sources) + "\n")


if __name__ == "__main__":
    main()
