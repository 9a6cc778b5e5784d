import os

import pytest

import apgaps


def _thread_count() -> int:
    return min(8, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def desk211():
    """Full scan of every residue class mod 211 up to 1e9.

    Takes tens of seconds, once per session.
    """
    return apgaps.scan_many(211, list(range(1, 211)), 10**9,
                            threads=_thread_count())


@pytest.fixture(scope="session")
def threads():
    return _thread_count()
