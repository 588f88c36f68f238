from __future__ import annotations

from emopipe.errors import ConfigError


def warmup_lr(step: int, base_lr: float, warmup_steps: int) -> float:
    """Linear ramp from 0 to ``base_lr`` over ``warmup_steps``, constant after.

    ``step`` counts optimizer updates already taken, so the very first update
    runs at ``warmup_lr(0, ...) == 0.0``.
    """
    if warmup_steps < 1:
        raise ConfigError(f"warmup_steps must be >= 1, got {warmup_steps}")
    if step < 0:
        raise ConfigError(f"step must be >= 0, got {step}")
    if step >= warmup_steps:
        return base_lr
    return base_lr * (step / warmup_steps)
