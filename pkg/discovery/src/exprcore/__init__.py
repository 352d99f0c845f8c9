from .expression import (
	Expression,
	NodeKind,
	UNARY_OPS,
	BINARY_OPS,
	arity,
	canonical_op,
	complexity,
	constants,
	depth,
	evaluate,
	evaluate_batch,
	preorder,
	replace_subtree,
	subtree_at,
	variable_indices,
	with_constants,
)
from .parser import parse, format_expression
from .canonical import CanonicalForm, Factor, canonicalize, structural_match
