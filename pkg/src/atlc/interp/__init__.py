"""Reference interpreter for expressions, predicates and index terms."""
from .values import (EXACT, FLOAT, zero_of, to_mode, type_of_value, check_value,
                     from_json, to_json, flatten, unflatten, inner, values_close)
from .evaluator import (Env, evaluate, evaluate_counting, eval_idx, eval_pred,
                        compile_idx, compile_pred)

eval_expr = evaluate
