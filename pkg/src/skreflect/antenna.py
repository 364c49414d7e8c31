"""Power budget of a receiving antenna in the Thevenin picture.

A receiving antenna is modelled as an open-circuit voltage source ``v_oc``
in series with ``Z_A = R_l + R_r + j X_A`` (loss resistance, radiation
resistance, reactance) feeding a load ``Z_L``. Under a conjugate match
(``Z_L = conj(Z_A)``) the received power splits into

* ``P_L = v_oc^2 / (8 (R_l + R_r))`` delivered to the load,
* ``P_l = v_oc^2 R_l / (8 (R_l + R_r)^2)`` dissipated as heat,
* ``P_r = v_oc^2 R_r / (8 (R_l + R_r)^2)`` re-radiated,

with total ``v_oc^2 / (4 (R_l + R_r))``. The re-radiation ratio
``P_r / P_total = R_r / (2 (R_l + R_r))`` is one half for a lossless antenna.

Only the re-radiated part of the scattered field is covered. The structural
(open-circuit) scattering term has no scalar closed form and is left out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class AntennaCircuit:
    r_loss: float
    r_rad: float
    x_a: float = 0.0
    z_load: complex | None = None
    v_oc: float = 1.0

    def __post_init__(self):
        if not self.r_rad > 0:
            raise ValueError(f"radiation resistance must be positive, got {self.r_rad}")
        if not self.r_loss >= 0:
            raise ValueError(f"loss resistance must be non-negative, got {self.r_loss}")
        if not self.v_oc > 0:
            raise ValueError(f"open-circuit voltage must be positive, got {self.v_oc}")
        if not all(math.isfinite(v) for v in (self.r_loss, self.r_rad, self.x_a, self.v_oc)):
            raise ValueError("circuit values must be finite")

    @property
    def z_antenna(self) -> complex:
        return complex(self.r_loss + self.r_rad, self.x_a)

    @property
    def is_conjugate_matched(self) -> bool:
        return self.z_load is not None and complex(self.z_load) == self.z_antenna.conjugate()


@dataclass(frozen=True)
class PowerBreakdown:
    p_load: float
    p_diss: float
    p_rerad: float
    p_total: float
    ratio: float


def matched_load(circuit: AntennaCircuit) -> AntennaCircuit:
    """Return ``circuit`` with the load set to the conjugate of ``Z_A``."""
    return replace(circuit, z_load=circuit.z_antenna.conjugate())


def power_breakdown(circuit: AntennaCircuit) -> PowerBreakdown:
    """Split the received power of a conjugate-matched antenna.

    Circuit values given as :class:`fractions.Fraction` give exact results,
    in which case ``p_load + p_diss + p_rerad == p_total`` holds exactly.

    Raises
    ------
    ValueError
        If the load is not the conjugate match; the power formulas hold
        only under that assumption.
    """
    if not circuit.is_conjugate_matched:
        raise ValueError("power_breakdown requires a conjugate-matched load; "
                         "call matched_load() first")
    # integer constants keep Fraction inputs exact
    r = circuit.r_loss + circuit.r_rad
    v2 = circuit.v_oc**2
    p_load = v2 / (8 * r)
    p_diss = v2 * circuit.r_loss / (8 * r * r)
    p_rerad = v2 * circuit.r_rad / (8 * r * r)
    p_total = v2 / (4 * r)
    return PowerBreakdown(p_load, p_diss, p_rerad, p_total, circuit.r_rad / (2 * r))


def suggest_alpha(ratio: float, coupling: float = 1.0) -> float:
    """Heuristic amplitude reflection coefficient ``coupling * sqrt(ratio)``.

    This is a modelling bridge, not a derived result: ``coupling`` lumps
    together everything between the re-radiated power fraction and what
    actually reaches the eavesdropper (directivity, path, structural
    scattering).
    """
    if not 0.0 <= ratio <= 0.5:
        raise ValueError(f"re-radiation ratio must lie in [0, 1/2], got {ratio}")
    if not 0.0 <= coupling <= 1.0:
        raise ValueError(f"coupling must lie in [0, 1], got {coupling}")
    return coupling * math.sqrt(ratio)
