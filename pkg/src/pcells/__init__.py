"""Kazhdan-Lusztig and p-canonical cells, and the half-twist action."""

__version__ = "0.1.0"


def clear_caches() -> None:
    """Forget memoized KL tables, engines and cell decompositions."""
    from . import cells, engine, hecke

    hecke._KL_MEMO.clear()
    hecke._BAR_MEMO.clear()
    engine._ENGINES.clear()
    cells._PRE_MEMO.clear()
    cells._DEC_MEMO.clear()
