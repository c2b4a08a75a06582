"""Shared fixtures: canonical example systems and a CLI runner."""

import contextlib
import io

import numpy as np
import pytest

from hypoindex import get_example, hermitian_split
from hypoindex.cli import main


@pytest.fixture(scope="session")
def b1_sys():
    return hermitian_split(get_example("b1"))


@pytest.fixture(scope="session")
def b2_sys():
    return hermitian_split(get_example("b2"))


@pytest.fixture(scope="session")
def envelope_sys():
    return hermitian_split(get_example("envelope"))


@pytest.fixture(scope="session")
def num1_sys():
    return hermitian_split(get_example("num1"))


@pytest.fixture(scope="session")
def num2_sys():
    return hermitian_split(get_example("num2"))


@pytest.fixture(scope="session")
def rotation_sys():
    # pure conservative block: norm identically 1, infinite index
    return hermitian_split(np.array([[0.0, 1.0], [-1.0, 0.0]]))


class CliResult:
    def __init__(self, code: int, stdout: str, stderr: str):
        self.code = code
        self.stdout = stdout
        self.stderr = stderr


@pytest.fixture
def run_cli():
    def run(*argv: str) -> CliResult:
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(list(argv))
        return CliResult(code, out.getvalue(), err.getvalue())

    return run
