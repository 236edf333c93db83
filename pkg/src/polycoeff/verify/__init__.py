"""Runnable checks for the rank bounds, each producing a :class:`VerdictReport`."""

from .claims import (RunOptions, check_abp_bound, check_depth3_bound, check_fischer,
                     check_imm_grid, check_imm_rank, check_preprocess_invariance,
                     check_product_sparse_bound, check_q_rank, check_power_rewrite,
                     check_total_dimension_bound, le_scaled_sqrt2, measure, min_total_dimension,
                     partition_experiment, total_dimension_bound)
from .report import CSV_HEADER, VerdictReport, reports_to_csv, strip_timing
from .suites import (PROPOSITION_CLAIMS, check_propositions, suite_abp, suite_depth3,
                     suite_fischer, suite_preprocess, suite_product_sparse, suite_power_rewrite,
                     suite_total_dimension, tight_depth3_instance)
