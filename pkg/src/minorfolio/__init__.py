"""Rooted minor folios, disjoint paths and the cut machinery behind them."""
