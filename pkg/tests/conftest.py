"""Shared test configuration.

Hypothesis runs derandomized so the suite is reproducible run to run;
deadlines are disabled because the enumeration-backed checks have wide
runtime variance across machines.
"""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")
