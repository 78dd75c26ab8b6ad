"""Critical exponents, k-trace bounds and the natural flow on hyperbolic space."""

from .symform import SymBilinearForm, k_trace, trace_on_subspace, trace_profile
from .rankone import RankOneSpace, critical_index, hd_bound
from .rootsys import build_root_system, get_preset, gap_bound, l_X, rho, s_eta
from .schottky import SchottkyGroupSpec, enumerate_orbit, estimate_delta
from .psflow import DiscreteBoundaryDensity, integrate_flow, verify_contraction

__version__ = "0.1.0"
