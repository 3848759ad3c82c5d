from relog.provenance.context import (
    DEFAULT_TOP_K, DEFAULT_WMC_VAR_CAP, DnfTag, InputVarTable,
    MinMaxProbContext, ProvenanceContext, TopKProofsContext, UnitContext,
    make_context,
)

__all__ = [
    "DEFAULT_TOP_K", "DEFAULT_WMC_VAR_CAP", "DnfTag", "InputVarTable",
    "MinMaxProbContext", "ProvenanceContext", "TopKProofsContext",
    "UnitContext", "make_context",
]
