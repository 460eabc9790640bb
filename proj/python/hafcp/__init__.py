"""Highly associated fuzzy churn pattern (HAFCP) mining.

Thin bindings over the C++ core: dataset loading and splitting, gradient
boosted trees, fuzzification, top-k high-utility pattern mining and the
pattern-augmented evaluation pipeline.
"""

from ._core import *  # noqa: F401,F403
from ._core import HafcpError, PipelineConfig


def run_pipeline(**settings):
    """Run train, fuzzify, mine and report with the given config keys.

    Returns the step log. Values are converted with str(); list values are
    joined with commas.
    """
    cfg = PipelineConfig()
    for key, value in settings.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(map(str, value))
        elif isinstance(value, bool):
            value = "true" if value else "false"
        cfg.set(key, str(value))
    from ._core import cmd_pipeline

    return cmd_pipeline(cfg)


__all__ = [name for name in dir() if not name.startswith("_")]
