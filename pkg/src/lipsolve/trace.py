"""Per-iteration solver traces with a shared CSV schema."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("k", "eta", "gamma", "seconds", "dist_to_ref")


@dataclass
class SolverTrace:
    """Iteration history of one solver run.

    Every list has one entry per recorded iteration.  ``gamma`` is NaN for
    solvers without a line search and ``dist_to_ref`` is NaN when no
    reference signal was supplied.
    """

    solver: str = ""
    k: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    dist_to_ref: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def record(self, k, eta, gamma=np.nan, seconds=0.0, dist_to_ref=np.nan):
        self.k.append(int(k))
        self.eta.append(float(eta))
        self.gamma.append(float(gamma))
        self.seconds.append(float(seconds))
        self.dist_to_ref.append(float(dist_to_ref))

    def __len__(self):
        return len(self.k)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in zip(self.k, self.eta, self.gamma, self.seconds,
                           self.dist_to_ref):
                fh.write("{:d},{:.17g},{:.17g},{:.17g},{:.17g}\n".format(*row))


def ref_distance(f, f_ref):
    if f_ref is None:
        return np.nan
    return float(np.linalg.norm(np.asarray(f) - np.asarray(f_ref)))
