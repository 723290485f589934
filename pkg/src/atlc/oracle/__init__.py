"""Independent checks: random sampling, probing, finite differences, the
pairing identity, instrumented costs and structural comparison."""
from .sampling import (DEFAULT_SEED, rng_for, random_scalar, random_value, random_env,
                       random_sizes, random_relations)
from .probes import (Subject, DenseJacobian, jacobian_by_probing, finite_diff_gradient,
                     check_universal_property, UniversalReport, pairing, MAX_DIM)
from .agreement import instrumented_cost, ssa_match
