"""Utilitários numéricos e de bitstrings"""
