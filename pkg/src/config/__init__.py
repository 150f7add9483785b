"""
Configuration: environment settings and run configuration
"""
