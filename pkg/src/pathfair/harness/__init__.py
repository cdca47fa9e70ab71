"""Experiment drivers, Monte Carlo estimators and reports."""
