"""Holomorphic semiflows on the unit disk: generators, flows, linearizers and petals."""
from .errors import (
    AlphaTooSmall, DivergentLimit, NoConvergence, PathThroughZero, PetalflowError,
    StepUnderflow, UnsupportedRegime,
)
from .flow import FlowOptions, advance, advance_backward, boundary_multiplier, trajectory
from .generators import (
    AtomicHerglotz, BerksonPorta, BoundaryFixedPoint, Complete, angular_derivative,
    boundary_null_points, classify, example1, example2, example3, is_complete,
    make_berkson_porta,
)
from .linearize import build_spirallike, invert, q_at_eta, visser_ostrowski
from .petals import backward_orbit, build_flower, membership, solve_petal, trace_boundary
from .render import RenderSpec, render_phase_portrait

__version__ = "0.1.0"
