from pllsim.analysis.compare import compare_models
from pllsim.core import PllParams, SignalState


def test_zero_detuning_equilibrium():
    p = PllParams.from_lead_lag(100000.0, 100000.0, 250.0, 0.0448, 0.0185)
    rep = compare_models(SignalState(0.0, 0.0, 0.0), p)
    assert rep.signal.locked and rep.phase.locked and rep.agree
    assert rep.max_g_deviation < 0.01


def test_small_offset_locks_in_both_models(signal_params):
    rep = compare_models(SignalState(0.01, 0.0, 0.0), signal_params)
    assert rep.signal.locked and rep.phase.locked
    # averaged signal output tracks the phase model once settled
    assert rep.max_g_deviation < 0.05
