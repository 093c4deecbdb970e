__all__ = ["jsonpersist"]
