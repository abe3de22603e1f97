"""Dependence of lock verdicts on integrator tolerance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..core import PllParams
from ..odeint import ADAPTIVE_RK45, IntegratorConfig
from ..simulate import simulate_phase
from .lock import LockCriteria, LockVerdict, detect_lock

REFERENCE_RTOL = 1e-9


def tolerance_config(rtol: float, t_end: float = 5.0, atol_ratio: float = 0.1) -> IntegratorConfig:
    """Adaptive configuration with atol tied to rtol."""
    return IntegratorConfig(method=ADAPTIVE_RK45, rtol=rtol, atol=atol_ratio * rtol, t_end=t_end)


@dataclass(frozen=True)
class SensitivityReport:
    verdicts: list  # (rtol, LockVerdict) in the order requested
    reference: LockVerdict
    coarsest_agreeing: Optional[float]  # largest rtol whose status matches the reference

    @property
    def flips(self) -> bool:
        return any(v.status != self.reference.status for _, v in self.verdicts)


def tolerance_sensitivity(initial, params: PllParams, rtol_list: Sequence[float],
                          criteria: LockCriteria = LockCriteria(), t_end: float = 5.0,
                          atol_ratio: float = 0.1) -> SensitivityReport:
    """Lock verdict of the phase model for every rtol in ``rtol_list``.

    The reference verdict comes from rtol=1e-9 (reused if it is in the list).
    """
    cache = {}

    def verdict(rtol):
        if rtol not in cache:
            traj = simulate_phase(params, initial, tolerance_config(rtol, t_end, atol_ratio))
            cache[rtol] = detect_lock(traj, criteria)
        return cache[rtol]

    results = [(rtol, verdict(rtol)) for rtol in rtol_list]
    ref = verdict(REFERENCE_RTOL)
    agreeing = [rtol for rtol, v in results if v.status == ref.status]
    return SensitivityReport(results, ref, max(agreeing) if agreeing else None)
