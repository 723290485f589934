"""Forward and adjoint derivatives, and the scalar primitive registry."""
from .registry import Primitive, PrimitiveRegistry, DEFAULT, default_registry
from .forward import DiffEnv, forward_deriv, forward_cost_check, zero_expr
from .adjoint import (InnerProduct, AdjointState, adjoint_deriv, desugar_inner,
                      seed_name)
from .checks import adjoint_cost_check, adjoint_cost_report, gradient
