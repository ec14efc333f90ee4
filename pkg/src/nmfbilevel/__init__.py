"""Sparsity-penalized KL-NMF with per-row l1 weights tuned in-loop by
bi-level hypergradient descent, plus baselines, benchmark generators,
metrics and a Monte-Carlo experiment harness."""

from .benchmarks import BenchmarkSpec, GroundTruth, gen_a, gen_b, gen_c, gen_d, generate
from .bilevel import BilevelConfig, init_lambda, lambda_step, run_bilevel
from .divergences import (
    beta_div_elem, penalized_objective, row_error, row_loss, total_divergence,
)
from .harness import ExperimentConfig, RunReport, emit_csv, run_experiment
from .hypergrad import (
    HypergradPieces, RowDynamics, fd_hypergradient_oracle, fmd_hypergradient,
    jacobian_A, jacobian_B, outer_gradient_G, phi_step, rmd_hypergradient,
)
from .matrices import EPS, load_matrix_csv, save_matrix_csv
from .metrics import (
    SirReport, kkt_residual, match_components, sir_db, sparsity,
)
from .mu import (
    FactorizationState, SolverConfig, grid_sweep, run_mu, run_pmu,
    update_h_beta, update_h_kl, update_w_penalized, update_w_penalized_row,
)

__version__ = "0.1.0"
