"""
Module for integration tests.
"""