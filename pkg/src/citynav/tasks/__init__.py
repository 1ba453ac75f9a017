from .mmnav import MMNavTask, NoValidPair, Subtask, check_subtask_success, generate_mmnav_task, render_instruction
from .mrs import InsufficientLandmarks, LandmarkMemory, MRSTask, build_landmark_memory, check_meetup, generate_mrs_task

__all__ = [
    "MMNavTask",
    "NoValidPair",
    "Subtask",
    "check_subtask_success",
    "generate_mmnav_task",
    "render_instruction",
    "InsufficientLandmarks",
    "LandmarkMemory",
    "MRSTask",
    "build_landmark_memory",
    "check_meetup",
    "generate_mrs_task",
]
