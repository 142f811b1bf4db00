"""Elastic-link manipulator simulation with fatigue lifetime estimation.

Pipeline: plan a pick-and-place trajectory, simulate the flexible-arm
dynamics under a cascaded position controller, convert the curvature at
the critical root section into plane stresses, rainflow-count the
equivalent stress on every cutting plane and accumulate Palmgren-Miner
damage into a lifetime estimate; sweep wall thicknesses for the
mass/vibration Pareto front.
"""

__version__ = "0.1.0"
