from __future__ import annotations

import re
from pathlib import Path

from plasticity_lab.harness.protocols import PROTOCOLS

ROOT = Path(__file__).resolve().parents[2]


def test_readme_lists_the_install_requirements():
    readme = (ROOT / "README.md").read_text(encoding="utf-8")
    setup = (ROOT / "setup.py").read_text(encoding="utf-8")
    block = setup.split("install_requires=[", 1)[1].split("]", 1)[0]
    packages = re.findall(r'"([A-Za-z0-9_-]+)', block)

    assert packages
    for package in packages:
        assert package in readme, package


def test_readme_documents_every_protocol():
    readme = (ROOT / "README.md").read_text(encoding="utf-8")
    for name in PROTOCOLS:
        assert f"| `{name}` |" in readme, name
