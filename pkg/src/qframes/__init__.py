"""Exact Born-rule toolkit for Wigner's-friend arguments and Boolean frames."""

from .frames import (
    ContradictionCertificate,
    Context,
    SupportTable,
    build_support_table,
    commutes,
    global_assignments,
    hardy_certificate,
    verify_certificate,
)
from .hilbert import (
    Factorization,
    Operator,
    StateVector,
    apply,
    inner_product,
    projector_from,
    tensor_operator,
    tensor_state,
)
from .measurement import PVM, OutcomeDistribution, born, conditionalize, join, lift, pvm_from_basis, sample, support
from .scenarios import (
    ChshSetting,
    FrReport,
    chsh_value,
    classical_chsh_bound,
    fr_protocol_state,
    fr_state,
    maximize_chsh,
    run_fr,
)

__version__ = "0.1.0"
