"""
Core plumbing: settings, logging, errors, logical ranks, snapshots
"""
