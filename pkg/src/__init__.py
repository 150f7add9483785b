"""
cpath - global feature importance from counterfactual paths
"""
