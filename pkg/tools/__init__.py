"""
Tools package for splitkit project.
"""
