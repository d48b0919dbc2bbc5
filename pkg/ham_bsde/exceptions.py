#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: exceptions.py

"""Core exceptions raised by ham_bsde"""


class HamError(Exception):
    pass


class ConfigError(HamError):
    pass


class DataError(HamError):
    pass


class VariableMismatchError(DataError):
    pass


class UnboundVariableError(DataError):
    pass


class HistoryError(HamError, IndexError):
    pass


class ResourceError(HamError):
    def __init__(self, message, order=None, terms=None):
        HamError.__init__(self, message)
        self.order = order
        self.terms = terms


class BoundaryError(HamError):
    pass


class UnsupportedError(HamError):
    pass


class DomainError(HamError, ValueError):
    pass
