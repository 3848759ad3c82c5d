from relog.ffi.builtins import register_builtins
from relog.ffi.descriptors import (
    ForeignAttributeDescriptor, ForeignFunctionDescriptor, ForeignPredicateDescriptor,
)
from relog.ffi.registry import PluginRegistry

__all__ = ["register_builtins", "ForeignAttributeDescriptor",
           "ForeignFunctionDescriptor", "ForeignPredicateDescriptor", "PluginRegistry"]
