"""Names of the resolvent differences handled by the package."""

from enum import Enum


class Kind(str, Enum):
    """Pair of realizations whose inverse difference is studied.

    ``DELTA_VS_FREE``: delta interaction of strength alpha against the free
    operator. ``DELTAPRIME_VS_FREE`` and ``DELTAPRIME_VS_NEUMANN``: delta-prime
    interaction of strength beta against the free operator and against the
    decoupled Neumann operator. ``NEUMANN_VS_FREE``: decoupled Neumann
    against free.
    """

    DELTA_VS_FREE = "delta_vs_free"
    DELTAPRIME_VS_FREE = "deltaprime_vs_free"
    DELTAPRIME_VS_NEUMANN = "deltaprime_vs_neumann"
    NEUMANN_VS_FREE = "neumann_vs_free"

    @property
    def order(self):
        """Decay order ``t``: the difference is of order ``-t``."""
        return {"delta_vs_free": 3, "deltaprime_vs_free": 2,
                "deltaprime_vs_neumann": 3, "neumann_vs_free": 2}[self.value]

    @property
    def uses_alpha(self):
        return self is Kind.DELTA_VS_FREE

    @property
    def uses_beta(self):
        return self in (Kind.DELTAPRIME_VS_FREE, Kind.DELTAPRIME_VS_NEUMANN)

    def exponent(self, n):
        """Power ``p`` with ``s_j ~ C j^{-p}`` in dimension ``n``."""
        return self.order / (n - 1)


def as_kind(kind):
    """Coerce a string or :class:`Kind` to :class:`Kind`."""
    try:
        return Kind(kind)
    except ValueError:
        names = ", ".join(k.value for k in Kind)
        raise ValueError(f"unknown kind {kind!r}; expected one of {names}") from None
