from relog.runtime.database import Database, ExecutionConfig
from relog.runtime.engine import Evaluator
from relog.runtime.terms import TermStore
from relog.runtime.values import Duration, Entity, Tensor, cosine_similarity

__all__ = ["Database", "ExecutionConfig", "Evaluator", "TermStore",
           "Duration", "Entity", "Tensor", "cosine_similarity"]
