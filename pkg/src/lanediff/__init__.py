"""lanediff: lane-vector map diffusion, BEV fusion, and trajectory
prediction/planning metrics on procedural synthetic scenes."""

__version__ = "0.1.0"
