"""Coadjoint orbits of strict Lie 2-groups and their multiplicative
symplectic structures, checked numerically."""

__version__ = "0.1.0"

from .coadjoint import (  # noqa: E402
    OrbitChart,
    Trajectory,
    coad_field,
    exact_flow,
    flow,
    kks_value,
    lie_poisson,
    orbit_chart,
    orbit_dimension_split,
)
from .crossed_module import CrossedModule, semidirect, validate  # noqa: E402
from .double import coadjoint_double, double_check  # noqa: E402
from .examples import BUILTIN_NAMES, builtin, example_heisenberg, example_pair, example_zero  # noqa: E402
from .groupoids import dual_structure, groupoid_axioms, lie2_structure  # noqa: E402
from .lie_core import LieAlgebra, derivation_algebra, matrix_exp  # noqa: E402
from .report import CheckReport  # noqa: E402
from .verify import (  # noqa: E402
    coisotropic_graph_check,
    multiplicative_form_check,
    orbit_unit_compose,
    pi_sharp_morphism_check,
    target_poisson_check,
)
