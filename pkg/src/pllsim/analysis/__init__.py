from .equilibria import Equilibrium, find_equilibria
from .lock import LockCriteria, LockStatus, LockVerdict, TrajectoryTooShort, detect_lock
from .orbits import (
    NoReturn,
    NoSignChange,
    PeriodicOrbit,
    find_periodic_orbits,
    locate_cycle_fold,
    orbit_gap,
    poincare_map,
)
from .attractors import AttractorKind, AttractorProtocol, NoStableOrbit, classify_attractor
from .compare import ModelComparison, compare_models
from .sensitivity import SensitivityReport, tolerance_sensitivity
