from .network import (
    Network,
    backward,
    clip,
    forward,
    init_network,
    loss,
    max_row_l1,
    project_restricted,
    zero_network,
)
from .train import Checkpoint, TrainConfig, train

__all__ = [
    "Checkpoint", "Network", "TrainConfig", "backward", "clip", "forward", "init_network",
    "loss", "max_row_l1", "project_restricted", "train", "zero_network",
]
