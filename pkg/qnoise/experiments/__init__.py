"""Experiments built on the engine: spectroscopy, decoupling, surface-code checks, Landau-Zener."""
