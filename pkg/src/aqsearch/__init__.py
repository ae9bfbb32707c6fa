"""Filter-cascade minimum search and Diophantine solvability lower bounds, simulated exactly."""

from .amplitude import (
    compute_rank,
    filter_amplitudes,
    good_probability,
    grover_schedule,
    min_search_analytic,
)
from .counting import counting_distribution, credible_interval, modal_estimate
from .diophantine import DiophantineFamily, classical_omega, decode_equation, eval_abs, quantum_omega
from .errors import CapExceeded, ContractViolation, DegenerateInput, TableFormatError
from .statevector import min_search_statevector, run_aqs_cascade
from .table import FunctionTable, load_table, parse_table

__version__ = "0.1.0"
