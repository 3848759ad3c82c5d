from relog.typesys.check import check_adornment, check_program
from relog.typesys.typed import TypedProgram
from relog.typesys.types import AdtRegistry, RelationSignature, TypeTable

__all__ = ["check_adornment", "check_program", "TypedProgram", "AdtRegistry",
           "RelationSignature", "TypeTable"]
