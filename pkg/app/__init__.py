"""
Polyhedral rigidity verification toolkit.
"""
