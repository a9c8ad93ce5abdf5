"""Shared test fixtures and helpers."""

from pathlib import Path

import pytest

from rifosim.core import Packet

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


_next_id = [0]


def mkpkt(rank: int, size: int = 1500, flow_id: int = 0) -> Packet:
    """Packet with an auto-assigned unique id; tests care about rank/size."""
    _next_id[0] += 1
    return Packet(_next_id[0], flow_id, rank, size)
