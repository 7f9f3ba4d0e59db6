import logging
from functools import wraps

from .exceptions import HomoglabException

log = logging.getLogger("homoglab")


def track(func=None, *, module: str = None, name: str = None):
    """
    Decorator to track a public numerical operation.

    Usage:
    ```
    from homoglab.decorators import track

    @track(module="corrector")
    def periodic_corrector(a_per, q):
        ...
    ```

    Arguments:
        module: Provenance recorded on any `HomoglabException` escaping the operation. Defaults to the
                last component of the function's module path.
        name: The name used in log records. Defaults to the fully qualified name of the function.
    """

    def _decorator(func):
        if not callable(func):
            raise Exception(f"Function must be callable: {func!r}")

        op_name = name or f"{func.__module__}.{func.__qualname__}"
        provenance = module or func.__module__.rsplit(".", 1)[-1]

        @wraps(func)
        def _inner(*args, **kwargs):
            log.debug("%s: start", op_name)
            try:
                result = func(*args, **kwargs)
            except HomoglabException as e:
                if e.module is None:
                    e.module = provenance
                log.warning("%s failed in %s: %s", op_name, e.module, e)
                raise

            log.debug("%s: done", op_name)
            return result

        return _inner

    return _decorator if func is None else _decorator(func)
