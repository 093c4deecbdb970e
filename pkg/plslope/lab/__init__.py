__all__ = ["families", "table", "experiments"]
