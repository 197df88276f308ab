"""Bispectral Wronskian extensions of the Askey-Wilson polynomials."""
