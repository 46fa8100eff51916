"""Operation counters threaded through the kernels for complexity accounting."""
from dataclasses import dataclass


@dataclass
class OpCount:
    adds: int = 0
    mults: int = 0

    def add(self, adds=0, mults=0):
        self.adds += int(adds)
        self.mults += int(mults)
        return self


def tally(counter, adds=0, mults=0):
    if counter is not None:
        counter.add(adds, mults)
