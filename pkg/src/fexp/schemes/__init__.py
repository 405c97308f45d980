"""Transmission schemes, their exact error oracles and MC estimators."""

from .types import (ErrorEstimate, InjectedNoise, PowerAudit, SchemeConfig, SchemeKind,
                    Tilt, Transcript)
from .oracles import (closed_form_error_as_scheme, closed_form_error_building_block,
                      closed_form_error_no_feedback, closed_form_error_three_phase,
                      error_given_ack, gamma_as, log_error_closed_form, nack_probability,
                      predicted_exponent, reference_exponent)
from .trials import (run_trial, run_trial_as_scheme, run_trial_building_block,
                     run_trial_no_feedback, run_trial_three_phase)
from .estimate import audit_power, default_tilt, estimate_error, estimate_retx_rate

__all__ = [
    "ErrorEstimate", "InjectedNoise", "PowerAudit", "SchemeConfig", "SchemeKind", "Tilt",
    "Transcript", "closed_form_error_as_scheme", "closed_form_error_building_block",
    "closed_form_error_no_feedback", "closed_form_error_three_phase", "error_given_ack",
    "gamma_as", "log_error_closed_form", "nack_probability", "predicted_exponent",
    "reference_exponent", "run_trial", "run_trial_as_scheme", "run_trial_building_block",
    "run_trial_no_feedback", "run_trial_three_phase", "audit_power", "default_tilt",
    "estimate_error", "estimate_retx_rate",
]
