from __future__ import annotations

import json
from pathlib import Path

import pytest

from vdo import Context, ReexecutionBackend, keygen, sha256

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def signature_vectors() -> list[dict]:
    return json.loads((DATA_DIR / "ed25519_sign_vectors.json").read_text())


@pytest.fixture(scope="session")
def trainer_keys():
    return keygen(sha256(b"test-trainer-key"))


@pytest.fixture(scope="session")
def attestor_keys():
    return keygen(sha256(b"test-attestor-key"))


@pytest.fixture(scope="session")
def backend():
    return ReexecutionBackend()


@pytest.fixture()
def golden_context() -> Context:
    return Context(
        model_id="resnet50-a1b2",
        step=7,
        batch_id=3,
        nonce=bytes(range(32)),
        layer_id="encoder.dropout1",
    )
