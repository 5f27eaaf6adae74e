"""forgeqa: deterministic corpus forging and analysis for multilingual extractive QA."""

__version__ = "0.1.0"
