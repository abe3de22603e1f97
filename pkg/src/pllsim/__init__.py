"""Simulation and nonlinear analysis of the classical phase-locked loop."""
