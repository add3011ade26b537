"""Finite difference solver for axisymmetric mean curvature flow of genus-0 surfaces."""

from .curves import (Cones, Custom, DiscreteCurve, Limacon, ShrinkerProfile, Sphere, sample_initial,
                     sphere_exact, sphere_samples, surface_area)
from .grid_ops import GridFunction
from .stepper import RunResult, SchemeParams, SnapshotSchedule, assemble, run, step

__all__ = ["Cones", "Custom", "DiscreteCurve", "GridFunction", "Limacon", "RunResult", "SchemeParams",
           "ShrinkerProfile", "SnapshotSchedule", "Sphere", "assemble", "run", "sample_initial",
           "sphere_exact", "sphere_samples", "step", "surface_area"]
