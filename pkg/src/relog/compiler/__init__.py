from relog.compiler.attributes import apply_attributes
from relog.compiler.desugar import desugar_disjunctive_heads, desugar_tensor_joins
from relog.compiler.plan import Plan, compile_to_plan
from relog.compiler.stratify import Stratum, stratify

__all__ = ["apply_attributes", "desugar_disjunctive_heads", "desugar_tensor_joins",
           "Plan", "compile_to_plan", "Stratum", "stratify"]
