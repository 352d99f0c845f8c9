from .config import LibrarySpec, OmpParams, Sr3Params, StlsqParams, sparse_params
from .library import build_library, library_terms
from .model import SparseModel, model_to_expressions
from .optimizers import omp, refit_support, sr3, stlsq, threshold_scan
from .regression import fit
