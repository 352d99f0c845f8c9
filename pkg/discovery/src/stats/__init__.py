from .metrics import capped_inv_log_mae, capped_r2, inv_log_mae, mae, r2
from .wilcoxon import WilcoxonResult, exact_pvalue, wilcoxon_signed_rank
from .compare import trajectory_compare
