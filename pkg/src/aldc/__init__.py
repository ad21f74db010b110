"""Verification and certification toolkit for approximate locally decodable codes over R^d."""

from .constructions import basis_code, hypercube, perturbed_hypercube, random_code, random_simple_code
from .core import (
    CodeConfig,
    DirectionMatching,
    VerificationReport,
    boundedness,
    density,
    is_simple,
    span_weight,
    verify,
    weight,
)
from .errors import ALDCError
from .io import load, parse, render, save
from .partition import general_bound, recursive_cut_certificate
from .qquery import qquery_bound
from .reduction import bucket_to_2bounded, reduce_to_simple
from .spectral import bounded_code_bound, trace_inequality_check
from .tiling import good_edge_probability_bound, large_alpha_certificate

__version__ = "0.1.0"
