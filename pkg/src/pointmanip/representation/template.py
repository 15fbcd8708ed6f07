"""Gripper keypoint template: fixed rigid offsets from the end-effector pose.

The default template has 9 keypoints: the palm center plus 4 points spread
along each jaw. The same template is shared by the simulation and perception
paths so the robot representation never diverges between domains.
"""

from dataclasses import dataclass

import numpy as np

from ..geometry import Pose, compose


@dataclass(frozen=True)
class GripperKeypointTemplate:
    offsets: tuple  # of Pose, in the EE frame

    def __len__(self) -> int:
        return len(self.offsets)

    def base_positions(self) -> np.ndarray:
        """Keypoint positions under the identity EE pose."""
        return np.stack([o.translation for o in self.offsets])


def default_template() -> GripperKeypointTemplate:
    offsets = [Pose(np.eye(3), np.array([0.0, 0.0, 0.08]))]  # palm center
    for y in (-0.04, 0.04):
        for z in np.linspace(0.0, 0.06, 4):
            offsets.append(Pose(np.eye(3), np.array([0.0, y, z])))
    return GripperKeypointTemplate(tuple(offsets))


def robot_keypoints(ee_pose: Pose, template: GripperKeypointTemplate) -> np.ndarray:
    """Base-frame keypoint positions: translation of ee_pose composed with
    each template offset."""
    return np.stack([compose(ee_pose, o).translation for o in template.offsets])
