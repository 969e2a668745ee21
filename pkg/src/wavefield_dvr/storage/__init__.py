from .result_store import ResultStore, format_value

__all__ = ["ResultStore", "format_value"]
