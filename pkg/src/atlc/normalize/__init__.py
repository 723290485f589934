"""Normalization passes from source terms down to Tensor SSA."""
from .passes import (let_lift, pair_elim, gen_pushout, validate_normal_form,
                     let_spine, FORMS)
from .ssa import (SSAProgram, InputRef, ConstGen, AddGen, MapGen, Contract,
                  validate_ssa, output_names)
from .convert import to_ssa, guard_pred
from .simplify import tidy, simplify_ssa, tidy_pred, solve_vars
from .pipeline import normalize, PASSES, run_pass
