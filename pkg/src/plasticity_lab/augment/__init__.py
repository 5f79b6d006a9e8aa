"""Random-shift data augmentation."""

from plasticity_lab.augment.shift import (
    ShiftAugmentConfig,
    Toggle,
    da_active,
    default_pad,
    random_shift,
    resolve_pad,
    toggle_events,
)

__all__ = [
    "ShiftAugmentConfig",
    "Toggle",
    "da_active",
    "default_pad",
    "random_shift",
    "resolve_pad",
    "toggle_events",
]
