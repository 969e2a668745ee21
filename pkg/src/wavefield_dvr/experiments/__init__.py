from .runner import ExperimentRunner

__all__ = ["ExperimentRunner"]
