"""Input checks shared by the estimators."""
from sklearn.utils.validation import check_is_fitted  # noqa: F401  re-exported


def check_sequence(seq, name="sequence"):
    """Return ``seq`` as a tuple of non-empty strings.

    A plain string is split on whitespace.
    """
    if isinstance(seq, str):
        seq = seq.split()
    try:
        seq = tuple(seq)
    except TypeError:
        raise TypeError(f"{name} must be a string or an iterable of tokens") from None
    for tok in seq:
        if not isinstance(tok, str) or not tok or any(ch.isspace() for ch in tok):
            raise ValueError(f"{name} contains an invalid token {tok!r}")
    return seq


def check_sequences(X, name="X", allow_empty_items=False):
    """Validate a non-empty collection of token sequences."""
    if isinstance(X, str):
        raise TypeError(f"{name} must be a collection of sequences, not a single string")
    out = [check_sequence(x, name) for x in X]
    if not out:
        raise ValueError(f"{name} is empty")
    if not allow_empty_items and any(len(x) == 0 for x in out):
        raise ValueError(f"{name} contains an empty sequence")
    return out


def check_pairs(X, y):
    X = check_sequences(X, "X")
    y = check_sequences(y, "y")
    if len(X) != len(y):
        raise ValueError(f"X and y have different lengths ({len(X)} vs {len(y)})")
    return X, y


def check_positive(value, name, integer=True):
    kind = int if integer else (int, float)
    if isinstance(value, bool) or not isinstance(value, kind) or value <= 0:
        raise ValueError(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}")
    return value
