"""Node geometry, path-loss gains and the derived channel forms.

Link naming follows the transmitter/receiver indices: ``c11`` is T1->U1,
``c12`` is T1->U2, ``c21`` is T2->U1, ``c22`` is T2->U2 and ``cTT`` is T1->T2.
All noise variances are one, so gains are dimensionless amplitudes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

from .errors import DomainError

Point = tuple[float, float]

# Default node placement of the numerical study.
T1_DEFAULT: Point = (0.0, 0.0)
U1_DEFAULT: Point = (1.0, 0.0)
U2_DEFAULT: Point = (1.0, -1.0)


@dataclass(frozen=True)
class Geometry:
    t1: Point = T1_DEFAULT
    u1: Point = U1_DEFAULT
    t2: Point = (0.5, 0.0)
    u2: Point = U2_DEFAULT
    pathloss_exponent: float = 3.0

    def __post_init__(self):
        if not self.pathloss_exponent > 0:
            raise DomainError(f"pathloss_exponent must be > 0, got {self.pathloss_exponent}")
        names = ("t1", "u1", "t2", "u2")
        pts = [getattr(self, n) for n in names]
        for i in range(4):
            for j in range(i + 1, 4):
                if math.dist(pts[i], pts[j]) == 0.0:
                    raise DomainError(f"nodes {names[i]} and {names[j]} are co-located at {pts[i]}")

    def distance(self, a: str, b: str) -> float:
        return math.dist(getattr(self, a), getattr(self, b))


@dataclass(frozen=True)
class ChannelGains:
    c11: complex
    c12: complex
    c21: complex
    c22: complex
    cTT: complex

    @property
    def phi21(self) -> float:
        """Phase of ``c21`` in radians (always derived, never stored)."""
        return cmath.phase(self.c21)

    def normalized(self) -> "ChannelGains":
        """Divide every gain by ``c11`` so that ``c11 == 1``."""
        if self.c11 == 0:
            raise DomainError("cannot normalize: c11 is zero")
        ref = complex(self.c11)
        return ChannelGains(
            c11=1.0 + 0.0j,
            c12=complex(self.c12) / ref,
            c21=complex(self.c21) / ref,
            c22=complex(self.c22) / ref,
            cTT=complex(self.cTT) / ref,
        )

    def decodable(self) -> bool:
        """T2 can decode the primary message before the primary receiver does."""
        return abs(self.cTT) > abs(self.c11)

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (complex(self.c11), complex(self.c12), complex(self.c21), complex(self.c22))


def gains_from_geometry(geo: Geometry, normalize: bool = True) -> ChannelGains:
    """Real path-loss amplitudes ``d**-alpha``; optionally normalized to ``|c11| = 1``."""
    a = geo.pathloss_exponent
    try:
        g = ChannelGains(
            c11=complex(geo.distance("t1", "u1") ** -a),
            c12=complex(geo.distance("t1", "u2") ** -a),
            c21=complex(geo.distance("t2", "u1") ** -a),
            c22=complex(geo.distance("t2", "u2") ** -a),
            cTT=complex(geo.distance("t1", "t2") ** -a),
        )
    except OverflowError:
        raise DomainError("nodes are too close for the path-loss model to be finite") from None
    return g.normalized() if normalize else g


@dataclass(frozen=True)
class EquivalentChannels:
    c11_p2: complex
    c12_p2: complex
    c11_p3: complex
    c12_p3: complex


def relay_rotation(g: ChannelGains) -> complex:
    """Phase rotation T2 applies to the relayed primary symbol.

    Aligns the relayed copy with the direct T1->U1 path; equals ``exp(-j*phi21)``
    when ``c11`` is normalized to one.
    """
    return cmath.exp(1j * (cmath.phase(g.c11) - g.phi21))


def relay_boost(g: ChannelGains, relay_power: float, p1: float) -> tuple[complex, complex]:
    """Effective (direct, eavesdropper) gains of the primary symbol when T2 relays it."""
    if p1 <= 0:
        raise DomainError(f"p1 must be > 0, got {p1}")
    if relay_power < 0:
        raise DomainError(f"relay power must be >= 0, got {relay_power}")
    k = relay_rotation(g) * math.sqrt(relay_power / p1)
    return g.c11 + g.c21 * k, g.c12 + g.c22 * k


def equivalent_channels(g: ChannelGains, params, p1: float) -> EquivalentChannels:
    """Relay-combined gains in phases 2 and 3.

    ``params`` needs ``rho2, rho3, gamma, p2_2, p2_3`` attributes (a
    :class:`~securecr.schemes.SchemeParams` in practice).
    """
    c11_2, c12_2 = relay_boost(g, (1.0 - params.rho2) * params.gamma * params.p2_2, p1)
    c11_3, c12_3 = relay_boost(g, (1.0 - params.rho3) * params.p2_3, p1)
    return EquivalentChannels(c11_2, c12_2, c11_3, c12_3)


@dataclass(frozen=True)
class StandardizedChannel:
    a: complex
    b: float
    p1_tilde: float
    p2_tilde: float

    def __post_init__(self):
        if self.p1_tilde < 0 or self.p2_tilde < 0:
            raise DomainError("standardized powers must be nonnegative")

    @property
    def degraded(self) -> bool:
        """Whether U2's observation of T1 is no stronger than U1's (|b| <= 1)."""
        return abs(self.b) <= 1.0

    def with_p2(self, p2_tilde: float) -> "StandardizedChannel":
        return replace(self, p2_tilde=p2_tilde)


def standardize(g: ChannelGains, p1: float, p2: float) -> StandardizedChannel:
    """Map the gains to the standard-form interference channel ``(a, b, P1~, P2~)``."""
    if g.c22 == 0 or g.c11 == 0:
        raise DomainError("standard form needs nonzero direct gains c11 and c22")
    if p1 < 0 or p2 < 0:
        raise DomainError("powers must be nonnegative")
    a = (g.c21 / g.c22) * cmath.exp(1j * (-cmath.phase(g.c11) + cmath.phase(g.c21)))
    b = abs(g.c12) / abs(g.c11)
    return StandardizedChannel(
        a=complex(a),
        b=b,
        p1_tilde=abs(g.c11) ** 2 * p1,
        p2_tilde=abs(g.c22) ** 2 * p2,
    )
