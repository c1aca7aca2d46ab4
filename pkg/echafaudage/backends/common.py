def maybe_print(*args, verbose=True, **kwargs):
    """
    An optional print statement.

    Args:
        args: some arguments to print
        verbose (bool): only print if set to True
        kwargs: some keyword arguments to print

    Returns:
        None

    """
    if verbose:
        print(*args, **kwargs)

def maybe_key(dictionary, key, default=None, func=None):
    """
    Compute func(dictionary[key]) when dictionary has key, else return default.

    Args:
        dictionary (dict): e.g. a parsed JSON report or scene file.
        key (any)
        default (optional; any): default return value
        func (optional; callable)

    Returns:
        func(dictionary[key]) or default if dictionary has no such key

    """
    try:
        value = dictionary[key]
    except KeyError:
        return default
    return value if func is None else func(value)

def inclusive_slice(tensor, start, stop, step):
    """
    Generator yielding consecutive chunks of rows from a tensor, so that
    neighbourhood work over many query points runs in bounded memory.

    Args:
        tensor (tensor (num_rows, ...)): the tensor to chunk.
        start (int): the start row.
        stop (int): the stop row (exclusive).
        step (int): the chunk size.

    Returns:
        (int, tensor): the offset of the chunk and the chunk.

    """
    current = start
    while current < stop:
        next_iter = min(stop, current + step)
        yield current, tensor[current:next_iter]
        current = next_iter
