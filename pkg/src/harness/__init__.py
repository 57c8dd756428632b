"""Experiment harness and command line for the Koopman sampling toolkit."""
