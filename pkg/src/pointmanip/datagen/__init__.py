from .dataset import Dataset, EpisodeRecord, load_dataset, write_dataset, world_from_json, world_to_json
from .generate import generate_dataset, make_pseudo_real_set, make_source_demos, materialize_episode
from .retarget import connection_actions, generate_episode, retarget_segment

__all__ = [
    "Dataset",
    "EpisodeRecord",
    "load_dataset",
    "write_dataset",
    "world_from_json",
    "world_to_json",
    "generate_dataset",
    "make_pseudo_real_set",
    "make_source_demos",
    "materialize_episode",
    "connection_actions",
    "generate_episode",
    "retarget_segment",
]
