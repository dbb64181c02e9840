"""Named reference states shipped with the package.

``example4`` is the four-qubit state
``sqrt5/4 (|0000> + |0100> + |1010>) + 1/4 |1111>`` whose concurrences
across ABC|D and AB|CD are sqrt(15)/8 and sqrt(65)/8.
"""
from __future__ import annotations

import math
from typing import Callable

from .errors import InvalidArgumentError
from .states import (
    PureState,
    State,
    SystemShape,
    basis,
    from_terms,
    ghz,
    mixture,
    product,
    w_state,
)


def example4() -> PureState:
    a = math.sqrt(5) / 4
    return from_terms(SystemShape.qubits(4), {"0000": a, "1111": 0.25, "0100": a, "1010": a})


def phi_plus() -> PureState:
    return from_terms(SystemShape.qubits(2), {"00": 1.0, "11": 1.0}, normalize=True)


def phi_plus_zero() -> PureState:
    """|Phi+> on AB with C in |0>."""
    return product(phi_plus(), basis(SystemShape.qubits(1), [0]))


def biseparable_mix() -> State:
    """Equal mixture of |Phi+>_AB |0>_C and |0>_A |Phi+>_BC."""
    zero = basis(SystemShape.qubits(1), [0])
    return mixture([0.5, 0.5], [product(phi_plus(), zero), product(zero, phi_plus())])


FIXTURES: dict[str, Callable[[], State]] = {
    "ghz3": lambda: ghz(3),
    "ghz4": lambda: ghz(4),
    "w3": lambda: w_state(3),
    "phi_plus_zero": phi_plus_zero,
    "biseparable_mix": biseparable_mix,
    "example4": example4,
}


def fixture(name: str) -> State:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise InvalidArgumentError(
            f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}"
        ) from None
