"""Explicit marker for quantities that are mathematically undefined."""


class Undefined:
    """Singleton standing in for a value with a vanishing denominator.

    It is deliberately not a float: arithmetic on it raises, so it cannot
    leak into downstream numbers as 0, inf or nan.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEF"

    def __str__(self):
        return "undef"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (Undefined, ())


UNDEF = Undefined()


def is_undef(value) -> bool:
    return value is UNDEF
