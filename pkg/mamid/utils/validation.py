import numpy as np

from mamid.utils.error_handler import DimensionError, PreconditionError, SchemaError


def require_columns(columns, required, source='input'):
    """Raise a schema error naming the first missing column."""
    present = set(columns)
    for field in required:
        if field not in present:
            raise SchemaError(f'Missing required column: {field}', source=str(source), column=field)


def require_positive(name, value, allow_zero=False):
    if value is None or (value < 0 if allow_zero else value <= 0):
        bound = '>= 0' if allow_zero else '> 0'
        raise PreconditionError(f'{name} must be {bound}, got {value}')
    return value


def require_fraction(name, value, inclusive=False):
    ok = 0 <= value <= 1 if inclusive else 0 < value < 1
    if not ok:
        raise PreconditionError(f'{name} must lie in {"[0, 1]" if inclusive else "(0, 1)"}, got {value}')
    return value


def require_finite(name, array, error=PreconditionError):
    array = np.asarray(array, dtype=float)
    bad = np.flatnonzero(~np.isfinite(array))
    if bad.size:
        raise error(f'{name} contains non-finite values', index=int(bad[0]))
    return array


def require_shape(name, array, shape):
    """Check array shape; None in `shape` matches any length."""
    actual = np.shape(array)
    if len(actual) != len(shape) or any(s is not None and s != a for s, a in zip(shape, actual)):
        raise DimensionError(f'{name} has shape {actual}, expected {tuple(shape)}')
    return array
