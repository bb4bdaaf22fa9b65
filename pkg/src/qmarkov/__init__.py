"""Ergodic theory of finite-dimensional quantum Markov maps.

Decision procedures for ergodicity, mixing, strong ergodicity and the
two-point Kolmogorov property of unital channels, the KMS adjoint, truncated
Markov dilations, and finitely correlated states on spin chains.
"""

from .channel import (DensityState, KrausChannel, SpectralData, Superoperator, apply, choi, compose,
                      kraus_from_superop, predual_apply, random_channel, spectrum, to_super)
from .chain import (PopescuTuple, chain_marginal, correlation_decay, factor_test, gauge_peripheral_group,
                    purity_test, support_reduce)
from .classify import (check_mixing_criterion, endomorphism_check, is_ergodic, is_mixing,
                       kolmogorov_two_point, strong_ergodicity)
from .dilation import build_dilation, dilate, kolmogorov_series_via_dilation
from .errors import QMarkovError
from .invariant import (compute_G, compute_G0, conditional_expectation, fixed_point_algebra, invariant_states,
                        reduce_channel, support_projection)
from .kms import ModularPair, kms_adjoint, kraus_span_distance, modular_commutation, verify_adjoint_relation

__version__ = "0.1.0"
