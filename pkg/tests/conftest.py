from pathlib import Path

import numpy as np
import pytest

from relayframe import _kernels
from relayframe.measure import DiscreteMeasureSpace, MeasureAtom
from relayframe.model import InnerAtom, LocalSystem, RelaySystem, Subspace, from_plain_frame

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def parseval_2d():
    """W = H = R^2, Lambda = I, inner atoms on the two axes, all weights 1."""
    inner = (
        InnerAtom(MeasureAtom("v1", 1.0), 1.0, Subspace.coordinate(2, [0])),
        InnerAtom(MeasureAtom("v2", 1.0), 1.0, Subspace.coordinate(2, [1])),
    )
    return RelaySystem(2, (LocalSystem(MeasureAtom("w1", 1.0), Subspace.full(2), np.eye(2), inner),))


def plain(vectors):
    return from_plain_frame(vectors, DiscreteMeasureSpace.counting(len(vectors)))


def mercedes():
    angles = 2 * np.pi * np.arange(3) / 3
    return plain([np.array([np.cos(t), np.sin(t)]) for t in angles])


def single_atom_2d(V_index):
    """One node, one atom: W = H, Lambda = I, V the given coordinate axis."""
    inner = (InnerAtom(MeasureAtom("v1", 1.0), 1.0, Subspace.coordinate(2, [V_index])),)
    return RelaySystem(2, (LocalSystem(MeasureAtom("w1", 1.0), Subspace.full(2), np.eye(2), inner),))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def kernels(request):
    return _kernels.NUMBA if request.param == "numba" else _kernels.NUMPY
