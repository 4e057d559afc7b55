"""
Run profiles.

A profile is a set of overrides applied on top of ``settings.PICKLING_LINE``.
"desk" keeps every job CI-sized; "full" runs the full-size networks and schedules.
"""

from .exceptions import ConfigurationError

PROFILES = {
    "desk": {
        "grade_hidden_units": 64,
        "grade_batch_size": 64,
        "grade_epochs": 40,
        "cgan_epochs": 300,
        "length_max": 600.0,
        "phase1_episodes": 200,
        "phase2_episodes": 50,
        "report_window": 50,
        "eval_episodes": 100,
    },
    "full": {
        "grade_hidden_units": 512,
        "grade_batch_size": 256,
        "grade_epochs": 500,
        "cgan_epochs": 2000,
        "phase1_episodes": 800,
        "phase2_episodes": 200,
        "report_window": 100,
        "eval_episodes": 100,
    },
}


def get_profile(name):
    """Return the override dict of a profile."""
    try:
        return dict(PROFILES[name])
    except KeyError:
        raise ConfigurationError(
            f"Unknown profile '{name}' (expected one of {sorted(PROFILES)})"
        )
