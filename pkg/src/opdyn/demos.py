"""Built-in configurations for the bundled demos."""

from __future__ import annotations

from .bias import Counterexample, Intergroup
from .config import ModelConfig, OutputSettings, RunSettings

# Six-agent example network; an arrow a -> b means a influences b.
EXAMPLE1_EDGES = (
    (1, 2, 0.6), (2, 1, 0.6),
    (2, 4, 0.4),
    (4, 6, 0.4),
    (1, 3, 0.4),
    (3, 5, 0.6),
    (5, 6, 0.6),
    (3, 4, 0.2), (4, 3, 0.2),
    (6, 1, 1.0),
)
EXAMPLE1_INITIAL = (0.0, 0.75, 0.1, 0.48, 0.52, 1.0)


def example1(transposed: bool = False) -> ModelConfig:
    """Six agents, intergroup bias.

    ``transposed=True`` reads every arrow the other way round (a -> b meaning
    a listens to b).
    """
    edges = tuple((d, s, w) for s, d, w in EXAMPLE1_EDGES) if transposed else EXAMPLE1_EDGES
    return ModelConfig(
        agents=6,
        edges=edges,
        initial=EXAMPLE1_INITIAL,
        bias=Intergroup(),
        run=RunSettings(),
        outputs=OutputSettings(trace_path="trace.csv", report_path="summary.json"),
    )


def counterexample() -> ModelConfig:
    return ModelConfig(
        agents=2,
        edges=((1, 2, 1.0), (2, 1, 1.0)),
        initial=(0.0, 0.2),
        bias=Counterexample(),
        outputs=OutputSettings(trace_path="trace.csv", report_path="summary.json"),
    )


LOGISTIC_MU = 3.4
LOGISTIC_X0 = 0.3
LOGISTIC_STEPS = 2000
LOGISTIC_BURN_IN = 1000

DEMOS = ("example1", "example1-transposed", "counterexample", "logistic")
