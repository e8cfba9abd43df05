"""
Command-line surface: subcommands, config schemas and validation
"""

from .schemas import SCHEMAS, FieldSpec, schema_help
from .services import EXIT_CHECK_FAILED, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, build_parser, check_document, dispatch
from .validation import validate_config, validate_document, write_effective_config

__all__ = [
    "SCHEMAS", "FieldSpec", "schema_help", "validate_config", "validate_document", "write_effective_config",
    "build_parser", "dispatch", "check_document", "EXIT_OK", "EXIT_CHECK_FAILED", "EXIT_USAGE", "EXIT_RUNTIME",
]
