"""Dropout-robust control and off-policy evaluation for factored multi-agent MDPs."""
