"""Work-cost semantics and its inner-product extension."""
from .work import cost, cost_breakdown, guard, Breakdown
from .sizes import type_size, pred_count, size_cost_io, cost_extended, inner_product_cost
