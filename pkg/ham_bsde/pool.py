#!/usr/bin/env python
# -*- coding: utf-8 -*-
# filename: pool.py

import logging
import os
from concurrent.futures import ProcessPoolExecutor

from ham_bsde.exceptions import ConfigError

logger = logging.getLogger(__name__)


class CellPool(object):
    """Bounded worker pool for independent sweep cells.

    One worker (the default when ``max_workers`` is 1) runs cells inline in
    the calling process. Results always come back in submission order.
    """

    def __init__(self, name="", max_workers=None):
        self.pool_name = name
        self.pid = os.getpid()
        if max_workers is None:
            max_workers = os.cpu_count() or 1
        if max_workers < 1:
            raise ConfigError("[-] Error: pool %s needs at least one worker, got %r." % (name, max_workers))
        self.max_workers = max_workers
        self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.destroy()

    def __del__(self):
        try:
            self.destroy()
        except Exception:
            pass

    def _check_pid(self):
        if self.pid != os.getpid():
            self._executor = None
            self.__init__(self.pool_name, self.max_workers)

    def get_executor(self):
        """Create the process executor on first use."""
        self._check_pid()
        if self._executor is None:
            self._executor = ProcessPoolExecutor(max_workers=self.max_workers)
            logger.debug("pool %s: started %d workers", self.pool_name, self.max_workers)
        return self._executor

    def map(self, fn, items):
        items = list(items)
        if self.max_workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        return list(self.get_executor().map(fn, items))

    def destroy(self):
        """Shut the workers down."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
            logger.debug("pool %s: stopped", self.pool_name)
