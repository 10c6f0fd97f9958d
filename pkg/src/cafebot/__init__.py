"""Embodied cafe-robot agent stack: simulated world, environment memory, skills, planning and evaluation."""

__version__ = "0.1.0"
