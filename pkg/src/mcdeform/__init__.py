"""Exact graded deformation calculus on symplectic coordinate spaces."""
from .scalars import BaseSeries, TruncationCtx, base_mul, koszul_sign, m_order

__all__ = ["BaseSeries", "TruncationCtx", "base_mul", "koszul_sign", "m_order"]
