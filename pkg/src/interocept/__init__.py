"""Desk-scale shared-control motion planning stack.

Occupancy-grid A* with hypergraph state-dependent costs, human/autonomy
velocity fusion with a logged dissonance trace, arc-length tracking and
proximity alerts, rule-based semantic feedback encoding, a few-shot
contrastive velocity-replay pipeline, and a kinematic multi-robot scenario
simulator with a live operator service.
"""

__version__ = "0.1.0"
