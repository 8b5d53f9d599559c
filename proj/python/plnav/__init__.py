"""Vision-based collision-avoidance lab: simulation, sensing, pseudo-laser and evaluation."""

from ._plnav import (
    Environment,
    InvariantError,
    IoError,
    NumericalError,
    ParseError,
    Pose,
    SamplingExhaustedError,
    Scenario,
    ShapeError,
    UsageError,
    augment,
    cli,
    denormalize,
    evaluate,
    load_scenario,
    parse_scenario,
    perceive,
    render_camera,
    reward_goal,
    reward_rotational,
    sensing_variants,
    slice_min_pool,
    train,
)

__all__ = [
    "Environment",
    "InvariantError",
    "IoError",
    "NumericalError",
    "ParseError",
    "Pose",
    "SamplingExhaustedError",
    "Scenario",
    "ShapeError",
    "UsageError",
    "augment",
    "cli",
    "denormalize",
    "evaluate",
    "load_scenario",
    "parse_scenario",
    "perceive",
    "render_camera",
    "reward_goal",
    "reward_rotational",
    "sensing_variants",
    "slice_min_pool",
    "train",
]
