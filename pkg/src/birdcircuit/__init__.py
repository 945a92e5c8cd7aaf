"""birdcircuit: compile Boolean decision problems into slingshot-puzzle gate
circuits, run shot strategies against them, and verify that circuit
solvability coincides with the source problem's answer."""

__version__ = "0.1.0"
