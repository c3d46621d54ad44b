"""Differentially private aggregation over trust graphs.

Library layout:
  graph     -- trust graph model, edge-list ingestion, mistrust thresholds
  lp        -- covering LPs, cutting planes, packing duals, in-repo simplex
  noise     -- discrete Laplace / negative binomial pmfs, samplers, certificates
  protocol  -- seeded protocol simulation with transcripts and views
  bounds    -- packings, dominating sets, randomized rounding, gap reports
  audit     -- exact and Monte-Carlo privacy audits, empirical MSE
  cli       -- the `tgdp` command-line front end
"""

from .graph import (DatasetRecord, GraphParseError, TrustGraph,
                    closed_neighborhood, degree_vector, load_registry,
                    make_threshold, parse_edge_list)
from .lp import (DualPacking, FractionalCover, InfeasibleError, LinearConstraint,
                 LinearProgram, LpSolution, UnboundedError, approx_cover,
                 build_cover_lp, robust_dual_multipliers, solve_cover, solve_lp,
                 solve_packing_dual, solve_robust_cover)
from .noise import (DiscreteLaplace, NegativeBinomial, PointMassZero, Pmf,
                    SymmetricNegativeBinomial, pmf, privacy_ratio, sample,
                    variance)
from .protocol import (BROADCAST, Message, Transcript, View, decode_mod,
                       extract_view, randomized_round, real_aggregate,
                       run_domset_protocol, run_lp_protocol,
                       run_robust_protocol, run_vecsum_protocol, split_input,
                       zcdp_to_dp)
from .bounds import (DominatingSetCertificate, GapReport, PackingCertificate,
                     exact_max_packing, exact_min_dominating_set, gap_report,
                     greedy_dominating_set, greedy_sqrt_packing,
                     maximal_packing, rounded_robust_packing,
                     validate_robust_packing)
from .audit import (AuditReport, MseReport, empirical_mse,
                    exact_statistic_audit, monte_carlo_view_audit,
                    rr_baseline_constant, rtgdp_curve)

__version__ = "0.1.0"
