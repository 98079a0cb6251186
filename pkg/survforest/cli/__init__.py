"""
Command-line module.
Typer commands and the staged runner behind them.
"""
