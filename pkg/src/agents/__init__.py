"""
Agents orchestrating simulation, explanation and evaluation runs
"""
