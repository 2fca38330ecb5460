"""Snapshot real service responses for the viewer tests.

Run from this directory (needs the h2s package installed):

    python3 make_fixtures.py

Writes meta.json, one compile_*.json per (camera, ability), every step
SVG for each session, and manifest.json describing the lot. The test
fetch mock replays these files, so viewer tests exercise genuine wire
bytes without a live server.
"""

import json
import os

from h2s.docio import canonical_dumps
from h2s.pipeline import build_plan
from h2s.sample_models import fixture_model
from h2s.service import ServiceState

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")

CAMERAS = {
    "home": {"eye": [2.3, 1.4, 2.0], "target": [0.5, 0.4, 0.25],
             "up": [0, 1, 0], "fov_deg": 40, "width": 800, "height": 600},
    "orbit": {"eye": [2.0, 1.4, 2.3], "target": [0.5, 0.4, 0.25],
              "up": [0, 1, 0], "fov_deg": 40, "width": 800, "height": 600},
}

SESSIONS = [
    ("home", "novice"),
    ("home", "apprentice"),
    ("home", "master"),
    ("orbit", "novice"),
]


def main():
    os.makedirs(OUT, exist_ok=True)
    state = ServiceState(build_plan(fixture_model("mixer")))

    status, _, meta_text, _ = state.meta()
    assert status == 200
    with open(os.path.join(OUT, "meta.json"), "w") as f:
        f.write(meta_text)

    manifest = {"meta": "meta.json", "cameras": CAMERAS, "compiles": [],
                "steps": {}}
    for cam_name, ability in SESSIONS:
        body = canonical_dumps(
            {"camera": CAMERAS[cam_name], "ability": ability}).encode()
        status, _, text, extra = state.compile(body)
        assert status == 200
        session = extra["X-H2S-Session"]
        fname = f"compile_{cam_name}_{ability}.json"
        with open(os.path.join(OUT, fname), "w") as f:
            f.write(text)
        n_steps = len(json.loads(text)["steps"])
        manifest["compiles"].append({
            "camera": cam_name, "ability": ability,
            "session": session, "file": fname,
        })
        manifest["steps"][session] = {
            "count": n_steps, "prefix": f"step_{session}_"}
        for i in range(n_steps):
            status, ctype, svg, _ = state.step_svg(i, session)
            assert status == 200 and ctype == "image/svg+xml"
            with open(os.path.join(OUT, f"step_{session}_{i:03d}.svg"),
                      "w") as f:
                f.write(svg)

    with open(os.path.join(OUT, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
    print(f"wrote fixtures for {len(SESSIONS)} sessions to {OUT}")


if __name__ == "__main__":
    main()
