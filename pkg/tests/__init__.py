"""Test package for nnlif-lab"""
