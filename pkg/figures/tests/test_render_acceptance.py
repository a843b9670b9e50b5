"""Renderer acceptance: byte-identical re-renders and verbatim point fidelity.

The inputs are real sweep artifacts produced by the simulator CLI, covering
the four Hund-coupling cases whose divergences the figures are about.
"""

import random
import shutil
import subprocess

import pytest
from matplotlib import pyplot as plt

from soifig import build_figure, spec_from_mapping
from soifig.cli import main

CASES = (
    ("a", 2.0, 0.0, 0.0),
    ("b", 2.0, -1.0, -0.5),
    ("c", 2.0, 0.1, -0.5),
    ("d", 2.0, -1.0, 0.5),
)


@pytest.fixture(scope="module")
def case_csvs(tmp_path_factory):
    exe = shutil.which("soichain")
    assert exe is not None, "simulator CLI must be installed"
    root = tmp_path_factory.mktemp("cases")
    paths = []
    for name, u, j, jp in CASES:
        csv_path = root / f"case_{name}.csv"
        command = [
            exe, "sweep-chi",
            "--t-s", "2", "--delta", "0.05",
            "--u", str(u), "--j", str(j), "--jp", str(jp),
            "--t-min", "0.4", "--t-max", "1.2", "--t-points", "16",
            "--k-points", "64",
            "--out-csv", str(csv_path),
            "--out-json", str(root / f"case_{name}.json"),
        ]
        done = subprocess.run(command, capture_output=True, text=True)
        assert done.returncode == 0, done.stderr
        paths.append(str(csv_path))
    return paths


@pytest.fixture(scope="module")
def panel_spec_text(case_csvs):
    return (
        "kind = sweep\n"
        f"csv = {','.join(case_csvs)}\n"
        "rows = 2\n"
        "cols = 2\n"
        "titles = case a, case b, case c, case d\n"
    )


def _finite_pairs(csv_path):
    pairs = set()
    with open(csv_path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    for line in lines[2:]:
        cells = line.split(",")
        if cells[3] != "":
            pairs.add((float(cells[0]), float(cells[3])))
    return pairs


def test_case_files_show_the_divergences(case_csvs):
    for path in case_csvs:
        text = open(path, encoding="utf-8").read()
        assert ",true," in text, f"{path} has no diverged rows"
        assert ",false," in text, f"{path} has no finite rows"


def test_renderer_acceptance(tmp_path, case_csvs, panel_spec_text, capsys):
    failures = []
    spec_path = tmp_path / "panels.txt"
    spec_path.write_text(panel_spec_text)

    outputs = []
    for name in ("first.svg", "second.svg"):
        out = str(tmp_path / name)
        code = main([str(spec_path), "--out", out])
        if code != 0:
            failures.append(f"render to {name} exited {code}")
        outputs.append(out)
    if not failures:
        first, second = (open(p, "rb").read() for p in outputs)
        if first != second:
            failures.append("two renders differ")

    spec = spec_from_mapping(
        {"kind": "sweep", "csv": ",".join(case_csvs), "rows": "2", "cols": "2"},
        str(tmp_path / "points.svg"),
    )
    fig, points = build_figure(spec)
    plt.close(fig)
    if len(points) < 100:
        failures.append(f"only {len(points)} plotted points, need 100 to sample")
    else:
        allowed = set()
        for path in case_csvs:
            allowed |= _finite_pairs(path)
        sample = random.Random(7).sample(points, 100)
        missing = [pair for pair in sample if pair not in allowed]
        if missing:
            failures.append(f"{len(missing)} plotted points not in any CSV")

    status = "FAIL" if failures else "PASS"
    with capsys.disabled():
        print(f"criterion 12 (renderer determinism and fidelity): {status}",
              flush=True)
    assert not failures, "; ".join(failures)
