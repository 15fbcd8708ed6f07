"""Point-based tabletop manipulation toolkit.

Subpackages:
  geometry        SE(3) / camera / sampling kernel
  sim             kinematic tabletop world, rendering, scripted demos
  datagen         demonstration retargeting and dataset generation
  representation  point-based observation construction
  policy          behavior-cloned point policies
  deploy          pseudo-real perception backends, rollouts, ablations
"""

__version__ = "0.1.0"
