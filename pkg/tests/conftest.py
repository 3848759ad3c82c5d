import os

import pytest

from relog import api

PROGRAMS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "programs")


def compile_text(text: str, base_dir: str = "."):
    return api.compile_program(text=text, base_dir=base_dir)


def run_text(text: str, provenance: str = "topkproofs", top_k: int = 3,
             base_dir: str = ".", queries=None, semi_naive: bool = True, config=None):
    compiled = compile_text(text, base_dir)
    _, results = api.run_program(compiled, provenance=provenance, top_k=top_k,
                                 queries=queries, semi_naive=semi_naive, config=config)
    return results


def program_path(*parts) -> str:
    return os.path.abspath(os.path.join(PROGRAMS_DIR, *parts))


@pytest.fixture
def programs_dir() -> str:
    return os.path.abspath(PROGRAMS_DIR)
