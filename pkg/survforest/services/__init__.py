"""
Services module.
Contains the estimators, tree and forest fitting, and evaluation logic.
"""
