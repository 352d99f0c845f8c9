from .systems import BUILTIN_SYSTEMS, SystemSpec, builtin_spec, expressions_field, resolve_spec, rhs, r0, vector_field
