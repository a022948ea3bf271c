"""Figures from the zsg sweep CSVs.

A pure consumer: it reads the CSV files the simulator writes and draws
them. All numbers come from the file; nothing is recomputed here.
"""
from .render import PlotSpec, SchemaError, load_table, main, render

__all__ = ["PlotSpec", "SchemaError", "load_table", "main", "render"]
