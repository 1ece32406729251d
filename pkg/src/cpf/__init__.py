"""Error probabilities for channel-position finding.

Finding which of ``m`` subsystems carries a target channel, with classical
or entangled probes: Gaussian-state tools, discrimination bounds, the
conditional-nulling receiver, and its quantum-reading and target-finding
applications.
"""
from . import channels, discrimination, fock, gaussian, reading, target_finding
from ._kernels import backend
from .discrimination import (DiscriminationResult, ErrorPair, barnum_ub, cn_asymptotic,
                             cn_error, cn_error_recursive, cn_monte_carlo, fidelity_lb,
                             helstrom_gus_pure, helstrom_gus_pure_asymptotic, no_feedforward)
from .reading import ReadingParams
from .target_finding import TargetFindingParams

__version__ = "0.1.0"
