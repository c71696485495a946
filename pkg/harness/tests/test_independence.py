"""The harness must talk to the simulator only through files."""

import pathlib

import fpmharness


def test_no_simulator_imports():
    pkg = pathlib.Path(fpmharness.__file__).parent
    for module in sorted(pkg.glob("*.py")):
        text = module.read_text(encoding="utf-8")
        assert "fpmkit" not in text, (
            f"{module.name} references the simulator package; the FPMS "
            f"container and weight-file formats are the only interface")
