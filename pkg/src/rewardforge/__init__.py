"""rewardforge: generate, validate, train, and refine reward functions
for classic control environments with an LLM critic/coder pair."""

__version__ = "0.1.0"
