"""Terms, types, predicates and the structural utilities every pass uses."""
from .hashcons import Node
from .index import Idx, ZERO, format_idx
from .pred import (Pred, PTrue, PFalse, TRUE, FALSE, Cmp, Rel, And, Or, Exists,
                   cmp, eq, lt, le, in_range, conj, disj, exists, exists_many,
                   conjuncts, pred_free, pred_subst, pred_rename, pred_relations)
from .types import (Type, Real, PairT, Tensor, REAL, tensor, dims, is_soa,
                    type_size, type_subst, type_names, proj_type, is_scalar, types_equal)
from .expr import (Expr, Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen,
                   BigSum, Access, Indicator, Let, const, neg, sub, access, gen,
                   bigsum, lets, proj_chain, children, term_size, ZERO_C, ONE_C)
from .subst import (free_vars, free_index, all_names, NameSupply, supply_for,
                    substitute, rename_vars, rename_index, alpha_unique)
from .typecheck import Typer, typecheck, annotate, well_typed
from .canon import canonicalize, alpha_equal, shape_key
