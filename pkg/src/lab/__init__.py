"""Numerical laboratory for the delayed NNLIF mean-field equation."""
