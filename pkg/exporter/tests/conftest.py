"""Shared fixtures: a seeded random checkpoint and one exported container."""

import pytest
import torch

from vggexport.arch import TRUNCATED_VGG19
from vggexport.export import export


def make_state_dict(seed: int = 0) -> dict:
    """Random weights with expected shapes; biases offset so layer means
    stay well away from zero (keeps relative comparisons meaningful)."""
    torch.manual_seed(seed)
    state = {}
    for spec in TRUNCATED_VGG19:
        if spec.kind != "conv":
            continue
        state[f"features.{spec.index}.weight"] = torch.randn(spec.weight_shape) * 0.02
        state[f"features.{spec.index}.bias"] = torch.rand(spec.out_channels) * 0.25 + 0.05
    return state


@pytest.fixture(scope="session")
def state_factory():
    return make_state_dict


@pytest.fixture(scope="session")
def checkpoint_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "vgg19_random.pth"
    torch.save(make_state_dict(), path)
    return path


@pytest.fixture(scope="session")
def container_dir(tmp_path_factory, checkpoint_path):
    out = tmp_path_factory.mktemp("container") / "vgg19"
    export("vgg19", out, checkpoint=checkpoint_path)
    return out


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if "test_roundtrip.py" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1]
            rows.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if not rows:
        return
    terminalreporter.write_sep("-", "container round-trip")
    for name, verdict in rows:
        terminalreporter.write_line(f"{verdict}  {name}")
