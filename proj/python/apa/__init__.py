from ._apa import (
    Cfg,
    ChangeError,
    Error,
    IrreducibleError,
    ParseError,
    Session,
    check_laws,
    generate_changes,
    synth,
)

__all__ = [
    "Cfg",
    "ChangeError",
    "Error",
    "IrreducibleError",
    "ParseError",
    "Session",
    "check_laws",
    "generate_changes",
    "synth",
]
