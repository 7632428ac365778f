"""Continual-learning language agent with causal-abstraction memory."""
