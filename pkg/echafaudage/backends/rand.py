import numpy

DEFAULT_SEED = 137

def make_rng(seed: int = None) -> numpy.random.Generator:
    """
    Create an independent random number generator.

    Notes:
        Default seed is 137.
        Nothing in the package touches the global numpy random state.

    Args:
        seed (optional; int): Random seed.

    Returns:
        numpy.random.Generator

    """
    return numpy.random.default_rng(DEFAULT_SEED if seed is None else int(seed))
